#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace sldp {

/// Largest state dimension supported. Small vectors live on the stack.
inline constexpr int kMaxDim = 6;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// Axis-aligned box [lo, hi] in R^d.
struct Box {
    Vec lo;
    Vec hi;

    static Box cube(int dim, double lo, double hi);

    int dim() const { return static_cast<int>(lo.size()); }
    bool contains(const Vec& x, double slack = 0.0) const;
    Vec width() const { return hi - lo; }
    Vec center() const { return 0.5 * (lo + hi); }
    /// Shrinks each side by `fraction` of the width along that axis.
    Box shrunk(double fraction) const;
    /// Restriction to coordinates [offset, offset + count).
    Box block(int offset, int count) const;
    std::string describe() const;
};

Vec make_vec(std::initializer_list<double> values);
Vec make_vec(const std::vector<double>& values);
std::vector<double> to_std(const Vec& v);

}  // namespace sldp
