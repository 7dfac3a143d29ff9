#pragma once

#include <span>
#include <vector>

namespace tt2fr {

/// Normal triangular type-1 fuzzy number. Membership is 0 at both support
/// endpoints and 1 at the peak.
struct TriT1Number {
    double left = 0.0;
    double peak = 0.0;
    double right = 0.0;

    bool is_valid() const { return left <= peak && peak <= right; }
    double membership(double x) const;
};

/// Perfectly normal triangular interval type-2 footprint
/// [[a_low, a_up], peak, [c_low, c_up]].
///
/// The upper membership function is the triangle (a_low, peak, c_up), the
/// lower one is (a_up, peak, c_low). Both reach 1 at the shared peak.
struct It2TriFou {
    double a_low = 0.0;
    double a_up = 0.0;
    double peak = 0.0;
    double c_low = 0.0;
    double c_up = 0.0;

    bool is_valid() const;
    bool is_crisp() const { return a_low == c_up; }

    TriT1Number umf() const { return {a_low, peak, c_up}; }
    TriT1Number lmf() const { return {a_up, peak, c_low}; }

    static It2TriFou crisp(double v) { return {v, v, v, v, v}; }

    friend bool operator==(const It2TriFou&, const It2TriFou&) = default;
};

/// Triangular type-2 fuzzy number: a footprint plus a triangular secondary
/// membership whose apex sits at `apex_fraction` of the way from the
/// (extended) lower leg to the upper leg.
struct Tt2Number {
    It2TriFou fou;
    double apex_fraction = 0.5;

    bool is_valid() const;
};

/// One fuzzy coefficient per regressor. Each entry is the quintuple
/// (a_low, a_up, b, c_low, c_up) stored as a footprint.
struct CoefficientSet {
    std::vector<It2TriFou> terms;

    std::size_t size() const { return terms.size(); }
    /// Nonnegativity plus the ordering chain, within `tol`.
    bool satisfies_ordering(double tol = 0.0) const;
};

/// Throws std::invalid_argument unless `fou` satisfies the ordering chain.
void validate(const It2TriFou& fou);
void validate(const Tt2Number& t);

double umf_at(const It2TriFou& fou, double x);
double lmf_at(const It2TriFou& fou, double x);

/// Secondary grade of primary membership `u` at abscissa `x`.
///
/// The secondary triangle spans from the lower leg (extended as a line past
/// its support, so it may be negative) to the upper membership at `x`.
double secondary_grade(const Tt2Number& t, double x, double u);

/// Multiplies every support by k > 0. Throws std::invalid_argument otherwise.
It2TriFou scale(const It2TriFou& fou, double k);
It2TriFou add(const It2TriFou& x, const It2TriFou& y);

/// Sum over j of scale(coeffs[j], x_row[j]), accumulated left to right.
/// Requires matching dimension and strictly positive inputs.
It2TriFou linear_combination(const CoefficientSet& coeffs, std::span<const double> x_row);

}  // namespace tt2fr
