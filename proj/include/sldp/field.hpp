#pragma once

#include "sldp/expression.hpp"
#include "sldp/modulus.hpp"
#include "sldp/types.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sldp {

/// A map R^in_dim -> R^rows or R^(rows x cols).
///
/// Fields are either native (a registry identifier plus a compiled kernel)
/// or parsed from expression text, one expression per output entry
/// separated by ';' (row-major for matrices), in the variables x1..x_in_dim.
class VectorField {
public:
    using Kernel = std::function<void(const Vec& x, Mat& out)>;

    static VectorField from_expression(std::string_view text, int in_dim, int rows, int cols = 1);
    static VectorField native(std::string id, int in_dim, int rows, int cols, Kernel kernel);

    static VectorField zero(int in_dim, int rows);
    static VectorField constant(const Vec& value, int in_dim);
    static VectorField identity(int dim);
    static VectorField linear(const Mat& a);
    static VectorField constant_matrix(const Mat& value, int in_dim);

    int in_dim() const noexcept { return in_dim_; }
    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    bool is_matrix() const noexcept { return cols_ > 1 || matrix_; }
    bool is_expression() const noexcept { return !expressions_.empty(); }

    void evaluate(const Vec& x, Mat& out) const;
    Vec operator()(const Vec& x) const;
    Mat matrix(const Vec& x) const;

    /// Expression text accepted by from_expression, or "registry:<id>" for native fields.
    std::string print() const;
    const std::string& id() const noexcept { return id_; }

    const std::optional<Modulus>& declared_modulus() const noexcept { return modulus_; }
    const std::optional<double>& declared_bound() const noexcept { return bound_; }
    VectorField& set_modulus(Modulus m) {
        modulus_ = std::move(m);
        return *this;
    }
    VectorField& set_bound(double b) {
        bound_ = b;
        return *this;
    }
    /// Marks a d x d field with cols == rows as matrix valued even when d = 1.
    VectorField& set_matrix(bool m) {
        matrix_ = m;
        return *this;
    }

private:
    int in_dim_ = 0;
    int rows_ = 0;
    int cols_ = 1;
    bool matrix_ = false;
    std::string id_;
    Kernel kernel_;
    std::vector<std::shared_ptr<const Expression>> expressions_;
    std::optional<Modulus> modulus_;
    std::optional<double> bound_;
};

}  // namespace sldp
