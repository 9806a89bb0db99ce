#pragma once

#include "sldp/types.hpp"

#include <array>
#include <cstddef>
#include <vector>

namespace sldp {

/// Vector-valued samples on a uniform tensor grid over a box, with
/// multilinear interpolation between nodes.
///
/// Nodes are numbered with axis 0 varying fastest. Queries that land within
/// 1e-9 cells of a node snap to it, so nodes reproduce stored values exactly.
class GridFunction {
public:
    using Index = std::array<int, kMaxDim>;

    GridFunction() = default;
    GridFunction(Box box, int resolution, int components);

    const Box& box() const noexcept { return box_; }
    int dim() const noexcept { return box_.dim(); }
    int resolution() const noexcept { return n_; }
    int components() const noexcept { return components_; }
    std::size_t node_count() const noexcept { return nodes_; }
    double spacing(int axis) const { return h_[axis]; }

    Index multi_index(std::size_t node) const;
    std::size_t node_index(const Index& idx) const;
    Vec node(std::size_t node) const;
    /// Linear node offset for a unit step along `axis`.
    std::size_t stride(int axis) const { return strides_[axis]; }

    double& at(std::size_t node, int component) { return values_[node * components_ + component]; }
    double at(std::size_t node, int component) const { return values_[node * components_ + component]; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::vector<double>& values() noexcept { return values_; }

    /// Multilinear interpolation. Throws DomainError outside the box.
    void evaluate(const Vec& x, double* out) const;
    Vec operator()(const Vec& x) const;

    /// d/dx_axis of every component at every node: centered differences in
    /// the interior, second-order one-sided differences on the boundary.
    /// Component c of the result at index c * dim + axis.
    GridFunction gradient() const;

    /// Second derivatives, component c at c * dim * dim + i * dim + j.
    /// Pure terms use the 3-point stencil (one-sided on the boundary), mixed
    /// terms difference the gradient along the second axis.
    GridFunction hessian() const;

private:
    double first_difference(std::size_t node, int axis, int component) const;
    double second_difference(std::size_t node, int axis, int component) const;

    Box box_;
    int n_ = 0;
    int components_ = 0;
    std::size_t nodes_ = 0;
    std::array<double, kMaxDim> h_{};
    std::array<std::size_t, kMaxDim> strides_{};
    std::vector<double> values_;
};

}  // namespace sldp
