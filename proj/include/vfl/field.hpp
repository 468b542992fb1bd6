#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <vector>

#include "vfl/grid.hpp"

namespace vfl {

static_assert(std::endian::native == std::endian::little,
              "field serialization assumes a little-endian host");

/// Node-ordered data on a structured grid with NComp values per node.
///
/// Storage is components-innermost with the x1 node index running fastest,
/// which is also the on-disk layout.
template <int Dim, int NComp>
class Field {
public:
    static constexpr int dim = Dim;
    static constexpr int components = NComp;

    Field() = default;

    explicit Field(const GridSpec<Dim>& grid)
        : grid_(grid), values_(static_cast<std::size_t>(grid.node_count()) * NComp, 0.0) {}

    const GridSpec<Dim>& grid() const { return grid_; }
    std::int64_t nodes() const { return grid_.node_count(); }

    double operator()(std::int64_t node, int c = 0) const {
        return values_[static_cast<std::size_t>(node) * NComp + c];
    }
    double& operator()(std::int64_t node, int c = 0) {
        return values_[static_cast<std::size_t>(node) * NComp + c];
    }

    std::int64_t node_index(const std::array<int, Dim>& idx) const {
        std::int64_t n = idx[Dim - 1];
        for (int a = Dim - 2; a >= 0; --a) n = n * grid_.nodes(a) + idx[a];
        return n;
    }

    std::array<int, Dim> node_multi_index(std::int64_t node) const {
        std::array<int, Dim> idx{};
        for (int a = 0; a < Dim; ++a) {
            idx[a] = static_cast<int>(node % grid_.nodes(a));
            node /= grid_.nodes(a);
        }
        return idx;
    }

    double at(const std::array<int, Dim>& idx, int c = 0) const {
        return (*this)(node_index(idx), c);
    }
    double& at(const std::array<int, Dim>& idx, int c = 0) {
        return (*this)(node_index(idx), c);
    }

    std::span<const double> data() const { return values_; }
    std::span<double> data() { return values_; }

    void fill(double v) { std::fill(values_.begin(), values_.end(), v); }

    /// this += a * other (grids must match).
    Field& add_scaled(const Field& other, double a) {
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += a * other.values_[i];
        return *this;
    }

    /// this += a * other, returning the sum of the increments so the caller
    /// can spot NaN/Inf without a second pass.
    double add_scaled_sum(const Field& other, double a) {
        double acc = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i) {
            const double v = a * other.values_[i];
            values_[i] += v;
            acc += v;
        }
        return acc;
    }

    Field& scale(double a) {
        for (double& v : values_) v *= a;
        return *this;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

    bool all_finite() const {
        for (double v : values_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    void require_finite(const char* context) const {
        if (!all_finite()) throw Error(std::string(context) + ": non-finite field values");
    }

    void write_binary(std::ostream& os) const {
        auto put_u32 = [&](std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); };
        auto put_f64 = [&](double v) { os.write(reinterpret_cast<const char*>(&v), 8); };
        put_u32(static_cast<std::uint32_t>(Dim));
        for (int a = 0; a < Dim; ++a) put_u32(static_cast<std::uint32_t>(grid_.cells[a]));
        for (int a = 0; a < Dim; ++a) put_f64(grid_.lengths[a]);
        put_u32(static_cast<std::uint32_t>(NComp));
        const std::uint8_t b = static_cast<std::uint8_t>(grid_.boundary);
        os.write(reinterpret_cast<const char*>(&b), 1);
        os.write(reinterpret_cast<const char*>(values_.data()),
                 static_cast<std::streamsize>(values_.size() * sizeof(double)));
    }

    static Field read_binary(std::istream& is) {
        auto get_u32 = [&] {
            std::uint32_t v = 0;
            is.read(reinterpret_cast<char*>(&v), 4);
            return v;
        };
        auto get_f64 = [&] {
            double v = 0;
            is.read(reinterpret_cast<char*>(&v), 8);
            return v;
        };
        const std::uint32_t dim_in = get_u32();
        if (dim_in != static_cast<std::uint32_t>(Dim))
            throw InvalidArgument("field read: dimension mismatch (file has " +
                                  std::to_string(dim_in) + ")");
        std::array<int, Dim> cells{};
        for (int a = 0; a < Dim; ++a) cells[a] = static_cast<int>(get_u32());
        std::array<double, Dim> lengths{};
        for (int a = 0; a < Dim; ++a) lengths[a] = get_f64();
        const std::uint32_t ncomp = get_u32();
        if (ncomp != static_cast<std::uint32_t>(NComp))
            throw InvalidArgument("field read: component count mismatch (file has " +
                                  std::to_string(ncomp) + ")");
        std::uint8_t b = 0;
        is.read(reinterpret_cast<char*>(&b), 1);
        if (b > 1) throw InvalidArgument("field read: bad boundary tag");
        Field f(make_grid<Dim>(cells, lengths, static_cast<Boundary>(b)));
        is.read(reinterpret_cast<char*>(f.values_.data()),
                static_cast<std::streamsize>(f.values_.size() * sizeof(double)));
        if (!is) throw InvalidArgument("field read: truncated stream");
        return f;
    }

    /// Plain-text dump for small grids: one node per row, x1 fastest.
    void write_csv(std::ostream& os) const {
        for (int a = 0; a < Dim; ++a) os << "x" << (a + 1) << ",";
        for (int c = 0; c < NComp; ++c) os << "c" << c << (c + 1 < NComp ? "," : "\n");
        char buf[32];
        for (std::int64_t n = 0; n < nodes(); ++n) {
            const auto idx = node_multi_index(n);
            for (int a = 0; a < Dim; ++a) {
                std::snprintf(buf, sizeof buf, "%.16e", grid_.coord(a, idx[a]));
                os << buf << ",";
            }
            for (int c = 0; c < NComp; ++c) {
                std::snprintf(buf, sizeof buf, "%.16e", (*this)(n, c));
                os << buf << (c + 1 < NComp ? "," : "\n");
            }
        }
    }

private:
    GridSpec<Dim> grid_;
    std::vector<double> values_;
};

template <int Dim> using ScalarField = Field<Dim, 1>;
template <int Dim> using VectorField = Field<Dim, Dim>;
template <int Dim> using TensorField = Field<Dim, Dim * Dim>;

/// Row-major component index of tensor entry (i, j).
template <int Dim>
constexpr int tc(int i, int j) { return i * Dim + j; }

/// Call f(multi_index, node) for every node, x1 index fastest.
template <int Dim, typename F>
void for_each_node(const GridSpec<Dim>& grid, F&& f) {
    std::array<int, Dim> idx{};
    std::int64_t node = 0;
    if constexpr (Dim == 2) {
        for (idx[1] = 0; idx[1] < grid.nodes(1); ++idx[1])
            for (idx[0] = 0; idx[0] < grid.nodes(0); ++idx[0]) f(idx, node++);
    } else {
        for (idx[2] = 0; idx[2] < grid.nodes(2); ++idx[2])
            for (idx[1] = 0; idx[1] < grid.nodes(1); ++idx[1])
                for (idx[0] = 0; idx[0] < grid.nodes(0); ++idx[0]) f(idx, node++);
    }
}

}  // namespace vfl
