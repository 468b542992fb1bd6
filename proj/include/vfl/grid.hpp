#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "vfl/error.hpp"

namespace vfl {

enum class Boundary : std::uint8_t {
    Periodic = 0,   ///< torus: node (i + 0.5) h identified modulo L
    NoSlipBox = 1,  ///< axis-aligned box with nodes on every face
};

inline const char* to_string(Boundary b) {
    return b == Boundary::Periodic ? "periodic" : "noslip";
}

/// Structured uniform grid on a d-dimensional box.
///
/// Periodic grids are cell-centered (n_k nodes per axis at (i+0.5) h_k);
/// no-slip boxes are vertex-centered (n_k+1 nodes per axis at i h_k) so
/// that boundary nodes exist on every face.
template <int Dim>
struct GridSpec {
    static_assert(Dim == 2 || Dim == 3, "grids are 2- or 3-dimensional");

    std::array<int, Dim> cells{};
    std::array<double, Dim> lengths{};
    Boundary boundary = Boundary::Periodic;

    double spacing(int axis) const { return lengths[axis] / cells[axis]; }

    int nodes(int axis) const {
        return boundary == Boundary::Periodic ? cells[axis] : cells[axis] + 1;
    }

    std::int64_t node_count() const {
        std::int64_t n = 1;
        for (int a = 0; a < Dim; ++a) n *= nodes(a);
        return n;
    }

    double coord(int axis, int i) const {
        return boundary == Boundary::Periodic ? (i + 0.5) * spacing(axis)
                                              : i * spacing(axis);
    }

    std::array<double, Dim> point(const std::array<int, Dim>& idx) const {
        std::array<double, Dim> x{};
        for (int a = 0; a < Dim; ++a) x[a] = coord(a, idx[a]);
        return x;
    }

    /// 1D quadrature weight of node i along `axis` (trapezoid end weights on
    /// a no-slip box, plain midpoint weight h elsewhere).
    double quad_weight(int axis, int i) const {
        const double h = spacing(axis);
        if (boundary == Boundary::NoSlipBox && (i == 0 || i == nodes(axis) - 1))
            return 0.5 * h;
        return h;
    }

    double volume() const {
        double v = 1.0;
        for (int a = 0; a < Dim; ++a) v *= lengths[a];
        return v;
    }

    double min_spacing() const {
        double h = spacing(0);
        for (int a = 1; a < Dim; ++a) h = h < spacing(a) ? h : spacing(a);
        return h;
    }

    bool on_boundary(const std::array<int, Dim>& idx) const {
        if (boundary == Boundary::Periodic) return false;
        for (int a = 0; a < Dim; ++a)
            if (idx[a] == 0 || idx[a] == nodes(a) - 1) return true;
        return false;
    }

    bool operator==(const GridSpec&) const = default;
};

/// Validating factory; the only supported way to build a grid.
template <int Dim>
GridSpec<Dim> make_grid(const std::array<int, Dim>& cells,
                        const std::array<double, Dim>& lengths,
                        Boundary boundary = Boundary::Periodic) {
    for (int a = 0; a < Dim; ++a) {
        if (cells[a] < 8)
            throw InvalidArgument("grid: need at least 8 cells per axis, got " +
                                  std::to_string(cells[a]) + " on axis " + std::to_string(a));
        if (!(lengths[a] > 0.0))
            throw InvalidArgument("grid: axis lengths must be positive");
    }
    GridSpec<Dim> g;
    g.cells = cells;
    g.lengths = lengths;
    g.boundary = boundary;
    return g;
}

/// Cube with n cells per axis and equal lengths (defaults to |Omega| = 1).
template <int Dim>
GridSpec<Dim> make_cube_grid(int n, double length = 1.0,
                             Boundary boundary = Boundary::Periodic) {
    std::array<int, Dim> cells;
    cells.fill(n);
    std::array<double, Dim> lengths;
    lengths.fill(length);
    return make_grid<Dim>(cells, lengths, boundary);
}

}  // namespace vfl
