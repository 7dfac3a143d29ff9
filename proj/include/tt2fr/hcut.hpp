#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "tt2fr/fuzzy_number.hpp"

namespace tt2fr {

/// Reduced footprint produced by cutting a triangular type-2 number at
/// secondary level h. x2h/x4h are the outer (upper membership) supports,
/// x1h/x3h the inner (lower membership) supports.
struct ReducedFou {
    double h = 0.0;
    double x1h = 0.0;
    double x2h = 0.0;
    double peak = 0.0;
    double x3h = 0.0;
    double x4h = 0.0;

    bool is_ordered() const { return x2h <= x1h && x1h <= peak && peak <= x3h && x3h <= x4h; }
    It2TriFou to_fou() const { return {x2h, x1h, peak, x3h, x4h}; }
};

/// Vertical cross-section of the secondary membership at an outer support
/// endpoint (x_l on the left, x_r on the right).
///
/// y_outer is the upper membership at the anchor (always 0 here); y_inner is
/// the lower leg extended as a line and evaluated at the same anchor, so it
/// is <= 0. It is -inf when the lower leg is vertical (inner support at the
/// peak).
struct SecondarySlice {
    double x_anchor = 0.0;
    double peak_abscissa = 0.0;
    double y_inner = 0.0;
    double y_outer = 0.0;
    double apex = 0.0;
};

/// Pair of reduced supports on one side: {inner, outer}.
struct SideCut {
    double inner = 0.0;
    double outer = 0.0;
};

/// Slice on the left anchor a_low. Empty when the left side has zero width
/// (a_low == peak), in which case the reduction is the identity there.
std::optional<SecondarySlice> left_slice(const Tt2Number& t);
/// Mirror of left_slice at the right anchor c_up.
std::optional<SecondarySlice> right_slice(const Tt2Number& t);

/// Left reduced supports {x1h, x2h}. Requires 0 <= h <= 1.
SideCut reduce_left(const Tt2Number& t, double h);
/// Right reduced supports {x3h, x4h}. Requires 0 <= h <= 1.
SideCut reduce_right(const Tt2Number& t, double h);

/// Full h-cut: a triangular type-2 number becomes an interval type-2
/// footprint. h = 0 returns the original supports; h = 1 collapses the
/// footprint to a single type-1 triangle.
ReducedFou reduce(const Tt2Number& t, double h);

/// Batch reduction; OpenMP-parallel over the elements.
std::vector<ReducedFou> reduce_all(std::span<const Tt2Number> values, double h);
/// Single-threaded reference for reduce_all. Results are bit-identical.
std::vector<ReducedFou> reduce_all_serial(std::span<const Tt2Number> values, double h);

}  // namespace tt2fr
