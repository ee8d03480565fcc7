#pragma once
#include <vector>

#include "a2lab/common.hpp"

namespace a2lab {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t points = 0;
};

// least squares y = intercept + slope x
LinearFit linear_fit(const Vec& x, const Vec& y);
// least squares log y = intercept + slope log x, positive entries only
LinearFit loglog_fit(const Vec& x, const Vec& y);

}  // namespace a2lab
