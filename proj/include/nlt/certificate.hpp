#pragma once

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

namespace nlt {

/// Sampled record of an inequality lhs <= rhs.
///
/// A sample passes when rhs - lhs >= -1e-10 * max(1, rhs); the certificate passes
/// when every sample does. An empty certificate passes vacuously.
struct BoundCertificate {
    std::string name;
    std::string provenance;
    std::vector<std::string> inputs;
    std::vector<double> lhs;
    std::vector<double> rhs;
    double margin = std::numeric_limits<double>::infinity();
    bool pass = true;

    static double slack(double rhs_value) { return 1e-10 * std::max(1.0, rhs_value); }

    void add(std::string input, double l, double r) {
        inputs.push_back(std::move(input));
        lhs.push_back(l);
        rhs.push_back(r);
        margin = std::min(margin, r - l);
        if (!(r - l >= -slack(r))) pass = false;
    }

    std::size_t failures() const {
        std::size_t n = 0;
        for (std::size_t i = 0; i < lhs.size(); ++i)
            if (!(rhs[i] - lhs[i] >= -slack(rhs[i]))) ++n;
        return n;
    }
};

}  // namespace nlt
