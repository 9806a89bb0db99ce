#include "sldp/grid.hpp"

#include "sldp/errors.hpp"

#include <cmath>

namespace sldp {

GridFunction::GridFunction(Box box, int resolution, int components)
    : box_(std::move(box)), n_(resolution), components_(components) {
    if (resolution < 3) throw InputError("grid resolution must be at least 3");
    if (components < 1) throw InputError("grid needs at least one component");
    nodes_ = 1;
    for (int a = 0; a < dim(); ++a) {
        if (!(box_.hi[a] > box_.lo[a])) throw InputError("grid box has an empty side");
        strides_[a] = nodes_;
        nodes_ *= static_cast<std::size_t>(n_);
        h_[a] = (box_.hi[a] - box_.lo[a]) / (n_ - 1);
    }
    values_.assign(nodes_ * components_, 0.0);
}

GridFunction::Index GridFunction::multi_index(std::size_t node) const {
    Index idx{};
    for (int a = 0; a < dim(); ++a) {
        idx[a] = static_cast<int>(node % n_);
        node /= n_;
    }
    return idx;
}

std::size_t GridFunction::node_index(const Index& idx) const {
    std::size_t node = 0;
    for (int a = 0; a < dim(); ++a) node += strides_[a] * static_cast<std::size_t>(idx[a]);
    return node;
}

Vec GridFunction::node(std::size_t node) const {
    const Index idx = multi_index(node);
    Vec x(dim());
    for (int a = 0; a < dim(); ++a) {
        x[a] = idx[a] == n_ - 1 ? box_.hi[a] : box_.lo[a] + idx[a] * h_[a];
    }
    return x;
}

void GridFunction::evaluate(const Vec& x, double* out) const {
    const int d = dim();
    if (x.size() != d) throw DomainError("grid query has wrong dimension");
    std::array<int, kMaxDim> cell{};
    std::array<double, kMaxDim> w{};
    for (int a = 0; a < d; ++a) {
        double t = (x[a] - box_.lo[a]) / h_[a];
        if (!(t >= -1e-9 && t <= (n_ - 1) + 1e-9)) {
            throw DomainError("grid query " + std::to_string(x[a]) + " outside [" + std::to_string(box_.lo[a]) +
                              ", " + std::to_string(box_.hi[a]) + "] on axis " + std::to_string(a + 1));
        }
        const double r = std::round(t);
        if (std::abs(t - r) < 1e-9) t = r;
        int i = static_cast<int>(std::floor(t));
        if (i >= n_ - 1) i = n_ - 2;
        if (i < 0) i = 0;
        cell[a] = i;
        w[a] = t - i;
    }
    for (int c = 0; c < components_; ++c) out[c] = 0.0;
    const int corners = 1 << d;
    for (int corner = 0; corner < corners; ++corner) {
        double weight = 1.0;
        std::size_t node = 0;
        for (int a = 0; a < d; ++a) {
            const bool upper = (corner >> a) & 1;
            weight *= upper ? w[a] : 1.0 - w[a];
            node += strides_[a] * static_cast<std::size_t>(cell[a] + (upper ? 1 : 0));
        }
        if (weight == 0.0) continue;
        for (int c = 0; c < components_; ++c) out[c] += weight * at(node, c);
    }
}

Vec GridFunction::operator()(const Vec& x) const {
    Vec out(components_);
    evaluate(x, out.data());
    return out;
}

double GridFunction::first_difference(std::size_t node, int axis, int c) const {
    const int i = multi_index(node)[axis];
    const std::size_t s = strides_[axis];
    const double h = h_[axis];
    if (i == 0) return (-3.0 * at(node, c) + 4.0 * at(node + s, c) - at(node + 2 * s, c)) / (2.0 * h);
    if (i == n_ - 1) return (3.0 * at(node, c) - 4.0 * at(node - s, c) + at(node - 2 * s, c)) / (2.0 * h);
    return (at(node + s, c) - at(node - s, c)) / (2.0 * h);
}

double GridFunction::second_difference(std::size_t node, int axis, int c) const {
    int i = multi_index(node)[axis];
    const std::size_t s = strides_[axis];
    const double h = h_[axis];
    std::size_t centre = node;
    if (i == 0) centre = node + s;
    if (i == n_ - 1) centre = node - s;
    return (at(centre - s, c) - 2.0 * at(centre, c) + at(centre + s, c)) / (h * h);
}

GridFunction GridFunction::gradient() const {
    const int d = dim();
    GridFunction g(box_, n_, components_ * d);
    for (std::size_t p = 0; p < nodes_; ++p) {
        for (int c = 0; c < components_; ++c) {
            for (int a = 0; a < d; ++a) g.at(p, c * d + a) = first_difference(p, a, c);
        }
    }
    return g;
}

GridFunction GridFunction::hessian() const {
    const int d = dim();
    const GridFunction g = gradient();
    GridFunction hess(box_, n_, components_ * d * d);
    for (std::size_t p = 0; p < nodes_; ++p) {
        for (int c = 0; c < components_; ++c) {
            for (int i = 0; i < d; ++i) {
                hess.at(p, c * d * d + i * d + i) = second_difference(p, i, c);
                for (int j = i + 1; j < d; ++j) {
                    const double mixed = g.first_difference(p, j, c * d + i);
                    hess.at(p, c * d * d + i * d + j) = mixed;
                    hess.at(p, c * d * d + j * d + i) = mixed;
                }
            }
        }
    }
    return hess;
}

}  // namespace sldp
