#include "tt2fr/hcut.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace tt2fr {

namespace {

void check_level(double h) {
    if (!(h >= 0.0 && h <= 1.0)) {
        throw std::invalid_argument("h-cut level must lie in [0, 1], got " + std::to_string(h));
    }
}

double apex_between(double inner, double outer, double fraction) {
    return inner + fraction * (outer - inner);
}

// Cut one side of the footprint. The reduced support is where the line
// through (q, 1) and (anchor, y) meets Y = 0, with y the secondary level-h
// endpoints on either side of the apex.
SideCut cut_side(const SecondarySlice& s, double fraction, double h) {
    const double q = s.peak_abscissa;
    const double span = s.x_anchor - q;

    if (!std::isfinite(s.y_inner)) {
        // Vertical lower leg: the secondary support is unbounded below, so any
        // cut above h = 0 pulls the lower endpoint to the peak. The apex
        // follows unless it sits on the upper leg.
        if (h == 0.0) {
            return {q, s.x_anchor};
        }
        if (fraction == 1.0) {
            return {h == 1.0 ? s.x_anchor : q, s.x_anchor};
        }
        return {q, q};
    }

    const double apex = s.apex;
    const double y_outer_h = apex + (1.0 - h) * (s.y_outer - apex);
    const double y_inner_h = apex - (1.0 - h) * (apex - s.y_inner);
    assert(1.0 - y_outer_h > 0.0 && 1.0 - y_inner_h > 0.0);

    SideCut cut{span / (1.0 - y_inner_h) + q, span / (1.0 - y_outer_h) + q};
    // Rounding must not break the nesting outer <= inner (left) / inner <= outer (right).
    if (span < 0.0) {
        cut.outer = std::min(cut.outer, cut.inner);
    } else {
        cut.outer = std::max(cut.outer, cut.inner);
    }
    return cut;
}

}  // namespace

std::optional<SecondarySlice> left_slice(const Tt2Number& t) {
    const auto& f = t.fou;
    if (f.a_low == f.peak) {
        return std::nullopt;
    }
    SecondarySlice s;
    s.x_anchor = f.a_low;
    s.peak_abscissa = f.peak;
    s.y_outer = 0.0;
    s.y_inner = f.a_up == f.peak ? -std::numeric_limits<double>::infinity()
                                 : (f.a_low - f.a_up) / (f.peak - f.a_up);
    s.apex = apex_between(s.y_inner, s.y_outer, t.apex_fraction);
    return s;
}

std::optional<SecondarySlice> right_slice(const Tt2Number& t) {
    const auto& f = t.fou;
    if (f.c_up == f.peak) {
        return std::nullopt;
    }
    SecondarySlice s;
    s.x_anchor = f.c_up;
    s.peak_abscissa = f.peak;
    s.y_outer = 0.0;
    s.y_inner = f.c_low == f.peak ? -std::numeric_limits<double>::infinity()
                                  : (f.c_low - f.c_up) / (f.c_low - f.peak);
    s.apex = apex_between(s.y_inner, s.y_outer, t.apex_fraction);
    return s;
}

SideCut reduce_left(const Tt2Number& t, double h) {
    check_level(h);
    validate(t);
    if (h == 0.0) {
        return {t.fou.a_up, t.fou.a_low};
    }
    const auto slice = left_slice(t);
    if (!slice) {
        return {t.fou.peak, t.fou.peak};
    }
    return cut_side(*slice, t.apex_fraction, h);
}

SideCut reduce_right(const Tt2Number& t, double h) {
    check_level(h);
    validate(t);
    if (h == 0.0) {
        return {t.fou.c_low, t.fou.c_up};
    }
    const auto slice = right_slice(t);
    if (!slice) {
        return {t.fou.peak, t.fou.peak};
    }
    return cut_side(*slice, t.apex_fraction, h);
}

ReducedFou reduce(const Tt2Number& t, double h) {
    const SideCut left = reduce_left(t, h);
    const SideCut right = reduce_right(t, h);
    return {h, left.inner, left.outer, t.fou.peak, right.inner, right.outer};
}

std::vector<ReducedFou> reduce_all(std::span<const Tt2Number> values, double h) {
    check_level(h);
    std::vector<ReducedFou> out(values.size());
    const auto n = static_cast<long long>(values.size());
    // Exceptions cannot cross the parallel region; validate up front.
    for (const auto& v : values) {
        validate(v);
    }
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = reduce(values[static_cast<std::size_t>(i)], h);
    }
    return out;
}

std::vector<ReducedFou> reduce_all_serial(std::span<const Tt2Number> values, double h) {
    std::vector<ReducedFou> out;
    out.reserve(values.size());
    for (const auto& v : values) {
        out.push_back(reduce(v, h));
    }
    return out;
}

}  // namespace tt2fr
