#include "qvi/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace qvi {

Grid::Grid(Vec lo, Vec hi, std::vector<int> nodes_per_axis)
    : lo_(lo), hi_(hi), nodes_(std::move(nodes_per_axis)) {
    const std::size_t d = lo_.size();
    if (d == 0) throw std::invalid_argument("Grid: empty box");
    if (hi_.size() != d || nodes_.size() != d)
        throw std::invalid_argument("Grid: lo/hi/nodes dimension mismatch");
    dx_.resize(d);
    for (std::size_t k = 0; k < d; ++k) {
        if (!(lo_[k] < hi_[k]))
            throw std::invalid_argument("Grid: degenerate box on axis " + std::to_string(k));
        if (nodes_[k] < 2)
            throw std::invalid_argument("Grid: need at least 2 nodes per axis");
        dx_[k] = (hi_[k] - lo_[k]) / (nodes_[k] - 1);
    }
    total_ = 1;
    for (std::size_t k = 0; k < d; ++k) {
        const std::size_t n = static_cast<std::size_t>(nodes_[k]);
        if (total_ > std::numeric_limits<std::size_t>::max() / n)
            throw std::invalid_argument("Grid: node count overflows the index space");
        total_ *= n;
    }
    // Row-major, axis 0 slowest.
    stride_.assign(d, 1);
    for (std::size_t k = d; k-- > 1;)
        stride_[k - 1] = stride_[k] * static_cast<std::size_t>(nodes_[k]);
}

double Grid::min_spacing() const {
    return *std::min_element(dx_.begin(), dx_.end());
}

Vec Grid::node_coord(std::size_t flat) const {
    Vec x(dim());
    for (std::size_t k = 0; k < dim(); ++k) {
        const std::size_t i = (flat / stride_[k]) % static_cast<std::size_t>(nodes_[k]);
        x[k] = axis_coord(k, static_cast<int>(i));
    }
    return x;
}

std::vector<int> Grid::multi_index(std::size_t flat) const {
    std::vector<int> mi(dim());
    for (std::size_t k = 0; k < dim(); ++k)
        mi[k] = static_cast<int>((flat / stride_[k]) % static_cast<std::size_t>(nodes_[k]));
    return mi;
}

std::size_t Grid::flat_index(const std::vector<int>& mi) const {
    std::size_t flat = 0;
    for (std::size_t k = 0; k < dim(); ++k)
        flat += static_cast<std::size_t>(mi[k]) * stride_[k];
    return flat;
}

std::size_t Grid::nearest_node(const Vec& x) const {
    std::size_t flat = 0;
    for (std::size_t k = 0; k < dim(); ++k) {
        const double t = (std::clamp(x[k], lo_[k], hi_[k]) - lo_[k]) / dx_[k];
        int i = static_cast<int>(std::lround(t));
        i = std::clamp(i, 0, nodes_[k] - 1);
        flat += static_cast<std::size_t>(i) * stride_[k];
    }
    return flat;
}

bool Grid::same_as(const Grid& o) const {
    return lo_ == o.lo_ && hi_ == o.hi_ && nodes_ == o.nodes_;
}

GridPtr build_grid(const Vec& lo, const Vec& hi, const std::vector<int>& nodes_per_axis) {
    return std::make_shared<Grid>(lo, hi, nodes_per_axis);
}

ValueField::ValueField(GridPtr g, double fill)
    : grid(std::move(g)), values(grid->node_count(), fill) {}

bool ValueField::finite() const {
    for (double v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

InterpStencil make_stencil(const Grid& grid, const Vec& x) {
    if (!x.finite()) throw std::invalid_argument("make_stencil: non-finite point");
    InterpStencil st;
    st.dim = static_cast<std::uint32_t>(grid.dim());
    for (std::size_t k = 0; k < grid.dim(); ++k) {
        const double lo = grid.lo()[k], hi = grid.hi()[k];
        const double xc = std::clamp(x[k], lo, hi);
        const double t = (xc - lo) / grid.spacing()[k];
        int i = static_cast<int>(std::floor(t));
        i = std::clamp(i, 0, grid.nodes_per_axis()[k] - 2);
        const double a = grid.axis_coord(k, i);
        const double b = grid.axis_coord(k, i + 1);
        // (xc - a) / (b - a) is exactly 0 or 1 when xc coincides with a node,
        // which keeps interpolation bitwise exact there.
        const double frac = std::clamp((xc - a) / (b - a), 0.0, 1.0);
        st.base += static_cast<std::size_t>(i) * grid.strides()[k];
        st.stride[k] = grid.strides()[k];
        st.frac[k] = frac;
    }
    return st;
}

double eval_stencil(const InterpStencil& st, const std::vector<double>& values) {
    double acc = 0.0;
    const std::uint32_t corners = 1u << st.dim;
    for (std::uint32_t c = 0; c < corners; ++c) {
        double w = 1.0;
        std::size_t idx = st.base;
        for (std::uint32_t k = 0; k < st.dim; ++k) {
            if (c & (1u << k)) {
                w *= st.frac[k];
                idx += st.stride[k];
            } else {
                w *= 1.0 - st.frac[k];
            }
        }
        acc += w * values[idx];
    }
    return acc;
}

double interpolate(const ValueField& field, const Vec& x) {
    return eval_stencil(make_stencil(*field.grid, x), field.values);
}

double sup_norm_diff(const ValueField& f1, const ValueField& f2) {
    if (!f1.grid || !f2.grid || !f1.grid->same_as(*f2.grid))
        throw std::invalid_argument("sup_norm_diff: grid mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < f1.values.size(); ++i)
        m = std::max(m, std::abs(f1.values[i] - f2.values[i]));
    return m;
}

double sup_norm(const ValueField& f) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
}

double lipschitz_seminorm(const ValueField& f) {
    const Grid& g = *f.grid;
    double lip = 0.0;
    for (std::size_t flat = 0; flat < g.node_count(); ++flat) {
        const auto mi = g.multi_index(flat);
        for (std::size_t k = 0; k < g.dim(); ++k) {
            if (mi[k] + 1 >= g.nodes_per_axis()[k]) continue;
            auto mj = mi;
            mj[k] += 1;
            const double d = std::abs(f.values[g.flat_index(mj)] - f.values[flat]);
            lip = std::max(lip, d / g.spacing()[k]);
        }
    }
    return lip;
}

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void write_field_csv(const ValueField& field, std::ostream& out) {
    const Grid& g = *field.grid;
    for (std::size_t k = 0; k < g.dim(); ++k) out << "x" << k << ",";
    out << "value\n";
    for (std::size_t flat = 0; flat < g.node_count(); ++flat) {
        const Vec x = g.node_coord(flat);
        for (std::size_t k = 0; k < g.dim(); ++k) out << fmt17(x[k]) << ",";
        out << fmt17(field.values[flat]) << "\n";
    }
}

void write_field_csv(const ValueField& field, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_field_csv(field, out);
}

ValueField read_field_csv(GridPtr grid, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty field CSV: " + path);
    ValueField f(grid);
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (row >= f.values.size()) throw std::runtime_error("field CSV has too many rows");
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(std::stod(cell));
        if (cells.size() != grid->dim() + 1)
            throw std::runtime_error("field CSV column count mismatch");
        f.values[row++] = cells.back();
    }
    if (row != f.values.size()) throw std::runtime_error("field CSV has too few rows");
    return f;
}

} // namespace qvi
