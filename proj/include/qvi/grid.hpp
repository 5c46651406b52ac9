#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qvi/vec.hpp"

namespace qvi {

struct QviForm;

/// Uniform rectilinear grid over an axis-aligned box.
///
/// Node order is row-major with axis 0 slowest, and node coordinates are
/// reproducible as lo + i * dx per axis.
class Grid {
public:
    Grid(Vec lo, Vec hi, std::vector<int> nodes_per_axis);

    std::size_t dim() const { return lo_.size(); }
    const Vec& lo() const { return lo_; }
    const Vec& hi() const { return hi_; }
    const std::vector<int>& nodes_per_axis() const { return nodes_; }
    const std::vector<double>& spacing() const { return dx_; }
    double min_spacing() const;
    std::size_t node_count() const { return total_; }

    double axis_coord(std::size_t axis, int i) const { return lo_[axis] + i * dx_[axis]; }

    Vec node_coord(std::size_t flat) const;
    std::vector<int> multi_index(std::size_t flat) const;
    std::size_t flat_index(const std::vector<int>& mi) const;
    const std::vector<std::size_t>& strides() const { return stride_; }

    /// Index of the grid node nearest to x (clamped into the box).
    std::size_t nearest_node(const Vec& x) const;

    bool same_as(const Grid& o) const;

private:
    Vec lo_, hi_;
    std::vector<int> nodes_;
    std::vector<double> dx_;
    std::vector<std::size_t> stride_;
    std::size_t total_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr build_grid(const Vec& lo, const Vec& hi, const std::vector<int>& nodes_per_axis);

/// Scalar field sampled on a grid, one value per node.
struct ValueField {
    GridPtr grid;
    std::vector<double> values;
    std::optional<std::string> form_tag; // provenance, e.g. "U"

    ValueField() = default;
    ValueField(GridPtr g, double fill = 0.0);

    bool finite() const;
};

/// Interpolation stencil: base cell corner plus per-axis weights.
///
/// Evaluation enumerates the 2^dim cell corners in a fixed order, so repeated
/// evaluations are bitwise reproducible and cheap to cache.
struct InterpStencil {
    std::size_t base = 0;                      // flat index of the low corner
    std::array<double, Vec::kMaxDim> frac{};   // in [0,1] per axis
    std::array<std::size_t, Vec::kMaxDim> stride{};
    std::uint32_t dim = 0;
};

InterpStencil make_stencil(const Grid& grid, const Vec& x);

double eval_stencil(const InterpStencil& st, const std::vector<double>& values);

/// Clamp x into the box, then multilinear interpolation; exact at nodes.
double interpolate(const ValueField& field, const Vec& x);

/// Max over nodes of |f1 - f2|. Grids must match.
double sup_norm_diff(const ValueField& f1, const ValueField& f2);

double sup_norm(const ValueField& f);

/// Max over adjacent node pairs of |Δvalue| / Δx (discrete Lipschitz seminorm).
double lipschitz_seminorm(const ValueField& f);

/// CSV with header x0,...,x{n-1},value; one node per row in grid order;
/// decimal text with 17 significant digits.
void write_field_csv(const ValueField& field, std::ostream& out);
void write_field_csv(const ValueField& field, const std::string& path);
ValueField read_field_csv(GridPtr grid, const std::string& path);

} // namespace qvi
