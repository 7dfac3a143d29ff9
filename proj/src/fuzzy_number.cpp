#include "tt2fr/fuzzy_number.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace tt2fr {

namespace {

double triangle(double left, double peak, double right, double x) {
    if (x == peak) {
        return 1.0;
    }
    if (x <= left || x >= right) {
        return 0.0;
    }
    return x < peak ? (x - left) / (peak - left) : (right - x) / (right - peak);
}

// Lower leg continued as a straight line beyond its support.
double extended_lower_leg(const It2TriFou& fou, double x) {
    if (x == fou.peak) {
        return 1.0;
    }
    if (x < fou.peak) {
        if (fou.a_up == fou.peak) {
            return -std::numeric_limits<double>::infinity();
        }
        return (x - fou.a_up) / (fou.peak - fou.a_up);
    }
    if (fou.c_low == fou.peak) {
        return -std::numeric_limits<double>::infinity();
    }
    return (fou.c_low - x) / (fou.c_low - fou.peak);
}

}  // namespace

double TriT1Number::membership(double x) const {
    return triangle(left, peak, right, x);
}

bool It2TriFou::is_valid() const {
    return std::isfinite(a_low) && std::isfinite(c_up) && a_low <= a_up && a_up <= peak &&
           peak <= c_low && c_low <= c_up;
}

bool Tt2Number::is_valid() const {
    return fou.is_valid() && apex_fraction >= 0.0 && apex_fraction <= 1.0;
}

bool CoefficientSet::satisfies_ordering(double tol) const {
    for (const auto& t : terms) {
        if (t.a_low < -tol || t.a_up - t.a_low < -tol || t.peak - t.a_up < -tol ||
            t.c_low - t.peak < -tol || t.c_up - t.c_low < -tol) {
            return false;
        }
    }
    return true;
}

void validate(const It2TriFou& fou) {
    if (!fou.is_valid()) {
        throw std::invalid_argument("footprint violates a_low <= a_up <= peak <= c_low <= c_up: (" +
                                    std::to_string(fou.a_low) + ", " + std::to_string(fou.a_up) +
                                    ", " + std::to_string(fou.peak) + ", " +
                                    std::to_string(fou.c_low) + ", " + std::to_string(fou.c_up) +
                                    ")");
    }
}

void validate(const Tt2Number& t) {
    validate(t.fou);
    if (!(t.apex_fraction >= 0.0 && t.apex_fraction <= 1.0)) {
        throw std::invalid_argument("apex_fraction must lie in [0, 1]");
    }
}

double umf_at(const It2TriFou& fou, double x) {
    return triangle(fou.a_low, fou.peak, fou.c_up, x);
}

double lmf_at(const It2TriFou& fou, double x) {
    return triangle(fou.a_up, fou.peak, fou.c_low, x);
}

double secondary_grade(const Tt2Number& t, double x, double u) {
    const auto& f = t.fou;
    if (x < f.a_low || x > f.c_up || f.is_crisp()) {
        // Only the crisp grade 0 (or 1 at a crisp point) is possible here.
        const double only = umf_at(f, x);
        return u == only ? 1.0 : 0.0;
    }
    const double hi = umf_at(f, x);
    const double lo = extended_lower_leg(f, x);
    if (!std::isfinite(lo)) {
        return 0.0;
    }
    const double apex = lo + t.apex_fraction * (hi - lo);
    return triangle(lo, apex, hi, u);
}

It2TriFou scale(const It2TriFou& fou, double k) {
    if (!(k > 0.0)) {
        throw std::invalid_argument("scale factor must be strictly positive, got " +
                                    std::to_string(k));
    }
    return {fou.a_low * k, fou.a_up * k, fou.peak * k, fou.c_low * k, fou.c_up * k};
}

It2TriFou add(const It2TriFou& x, const It2TriFou& y) {
    return {x.a_low + y.a_low, x.a_up + y.a_up, x.peak + y.peak, x.c_low + y.c_low,
            x.c_up + y.c_up};
}

It2TriFou linear_combination(const CoefficientSet& coeffs, std::span<const double> x_row) {
    if (coeffs.terms.empty() || coeffs.terms.size() != x_row.size()) {
        throw std::invalid_argument("linear_combination: " + std::to_string(coeffs.terms.size()) +
                                    " coefficients but " + std::to_string(x_row.size()) +
                                    " inputs");
    }
    It2TriFou acc = scale(coeffs.terms[0], x_row[0]);
    for (std::size_t j = 1; j < x_row.size(); ++j) {
        acc = add(acc, scale(coeffs.terms[j], x_row[j]));
    }
    return acc;
}

}  // namespace tt2fr
