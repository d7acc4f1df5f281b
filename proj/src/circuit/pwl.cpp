#include "pdn/circuit/pwl.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "pdn/error.hpp"

namespace pdn::circuit {

double PwlSource::eval(double t) const {
    if (points.empty()) return 0.0;
    if (t <= points.front().t) return points.front().i;
    if (t >= points.back().t) return points.back().i;
    auto hi = std::upper_bound(points.begin(), points.end(), t,
                               [](double x, const PwlPoint& p) { return x < p.t; });
    auto lo = hi - 1;
    const double w = (t - lo->t) / (hi->t - lo->t);
    return lo->i + w * (hi->i - lo->i);
}

void PwlSource::validate() const {
    for (std::size_t k = 1; k < points.size(); ++k) {
        if (!(points[k].t > points[k - 1].t)) {
            throw InvalidArgument(fmt::format("PWL breakpoint {} at t = {:.6e} is not after t = {:.6e}",
                                              k, points[k].t, points[k - 1].t));
        }
    }
}

double eval_pwl(const PwlSource& source, double t) { return source.eval(t); }

double pwl_integral(const PwlSource& source) {
    double area = 0.0;
    for (std::size_t k = 1; k < source.points.size(); ++k) {
        const PwlPoint& a = source.points[k - 1];
        const PwlPoint& b = source.points[k];
        area += 0.5 * (b.t - a.t) * (a.i + b.i);
    }
    return area;
}

std::vector<double> breakpoint_union(std::span<const PwlSource> sources) {
    std::vector<double> t;
    for (const PwlSource& s : sources) {
        for (const PwlPoint& p : s.points) t.push_back(p.t);
    }
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
}

}  // namespace pdn::circuit
