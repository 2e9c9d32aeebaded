#include <cmath>

#include "nlt/evolution.hpp"

namespace nlt {

namespace {

// Fourth-order cumulative rule on a uniform mesh: integral over panel
// [x_j, x_{j+1}] from the cubic through four neighbouring samples.
CMatrix panel_integral(const std::vector<CMatrix>& f, int j, double h) {
    const int m = static_cast<int>(f.size()) - 1;
    const double c = h / 24.0;
    if (j == 0) return c * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]);
    if (j == m - 1) return c * (f[m - 3] - 5.0 * f[m - 2] + 19.0 * f[m - 1] + 9.0 * f[m]);
    return c * (-f[j - 1] + 13.0 * f[j] + 13.0 * f[j + 1] - f[j + 2]);
}

}  // namespace

std::vector<CMatrix> dyson_terms(const Hamiltonian& h, double x0, double x, const CMatrix& initial,
                                 int panels, int max_order, std::size_t memory_budget,
                                 const std::function<bool(int, const CMatrix&)>& stop) {
    if (panels < 3) throw std::invalid_argument("dyson_terms: need at least 3 panels");
    if (!(x0 <= x)) throw std::invalid_argument("dyson_terms: requires x0 <= x");
    if (initial.rows() != 2 * h.grid()->size())
        throw std::invalid_argument("dyson_terms: initial block must have 2N rows");
    const double bytes = 2.0 * (panels + 1.0) * static_cast<double>(initial.size()) * sizeof(Complex);
    if (bytes > static_cast<double>(memory_budget))
        throw ResourceError("Dyson recursion needs " + std::to_string(static_cast<std::uint64_t>(bytes)) +
                            " bytes, above the budget of " + std::to_string(memory_budget));

    const double dx = (x - x0) / panels;
    std::vector<double> nodes(panels + 1);
    for (int j = 0; j <= panels; ++j) nodes[j] = j == panels ? x : x0 + j * dx;

    std::vector<CMatrix> cur(panels + 1, initial);
    std::vector<CMatrix> next(panels + 1);
    std::vector<CMatrix> terms{initial};
    Complex phase{1.0, 0.0};
    for (int order = 1; order <= max_order; ++order) {
        // f_j = H(x_j) I_{n-1}(x_j); independent per node.
#pragma omp parallel for schedule(static)
        for (int j = 0; j <= panels; ++j) cur[j] = h.apply(nodes[j], cur[j]);
        next[0] = CMatrix::Zero(initial.rows(), initial.cols());
        for (int j = 0; j < panels; ++j) next[j + 1] = next[j] + panel_integral(cur, j, dx);
        std::swap(cur, next);
        phase *= -kI;
        terms.push_back(phase * cur[panels]);
        if (stop && stop(order, terms.back())) break;
    }
    return terms;
}

}  // namespace nlt
