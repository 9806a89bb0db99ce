#include "sldp/field.hpp"

#include "sldp/errors.hpp"

#include <sstream>

namespace sldp {

namespace {

std::vector<std::string> split_entries(std::string_view text) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        const std::size_t end = text.find(';', start);
        parts.emplace_back(text.substr(start, end == std::string_view::npos ? text.npos : end - start));
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return parts;
}

}  // namespace

VectorField VectorField::from_expression(std::string_view text, int in_dim, int rows, int cols) {
    if (in_dim < 1 || rows < 1 || cols < 1 || in_dim > kMaxDim || rows > kMaxDim || cols > kMaxDim) {
        throw InputError("field dimensions out of range");
    }
    std::vector<std::string> variables;
    for (int i = 1; i <= in_dim; ++i) variables.push_back("x" + std::to_string(i));

    const auto parts = split_entries(text);
    if (static_cast<int>(parts.size()) != rows * cols) {
        throw InputError("field '" + std::string(text) + "' has " + std::to_string(parts.size()) +
                         " entries, expected " + std::to_string(rows * cols));
    }

    VectorField f;
    f.in_dim_ = in_dim;
    f.rows_ = rows;
    f.cols_ = cols;
    f.id_ = "expression";
    std::size_t offset = 0;
    for (const auto& part : parts) {
        try {
            f.expressions_.push_back(std::make_shared<const Expression>(Expression::parse(part, variables)));
        } catch (const ParseError& e) {
            throw ParseError(std::string("in entry '") + part + "': syntax error", offset + e.position(), e.token());
        }
        offset += part.size() + 1;
    }
    f.kernel_ = [exprs = f.expressions_, rows, cols](const Vec& x, Mat& out) {
        out.resize(rows, cols);
        const std::span<const double> vars(x.data(), static_cast<std::size_t>(x.size()));
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                out(r, c) = exprs[static_cast<std::size_t>(r * cols + c)]->evaluate(vars);
            }
        }
    };
    return f;
}

VectorField VectorField::native(std::string id, int in_dim, int rows, int cols, Kernel kernel) {
    VectorField f;
    f.in_dim_ = in_dim;
    f.rows_ = rows;
    f.cols_ = cols;
    f.id_ = std::move(id);
    f.kernel_ = std::move(kernel);
    return f;
}

VectorField VectorField::zero(int in_dim, int rows) {
    return native("zero", in_dim, rows, 1, [rows](const Vec&, Mat& out) { out.setZero(rows, 1); });
}

VectorField VectorField::constant(const Vec& value, int in_dim) {
    std::ostringstream id;
    id.precision(17);
    id << "constant(";
    for (int i = 0; i < value.size(); ++i) id << (i ? "," : "") << value[i];
    id << ")";
    return native(id.str(), in_dim, static_cast<int>(value.size()), 1,
                  [value](const Vec&, Mat& out) { out = value; });
}

VectorField VectorField::identity(int dim) {
    return native("identity", dim, dim, 1, [](const Vec& x, Mat& out) { out = x; });
}

VectorField VectorField::linear(const Mat& a) {
    std::ostringstream id;
    id.precision(17);
    id << "linear(" << a.rows() << "x" << a.cols() << ":";
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) id << (i + j ? "," : "") << a(i, j);
    id << ")";
    return native(id.str(), static_cast<int>(a.cols()), static_cast<int>(a.rows()), 1,
                  [a](const Vec& x, Mat& out) { out = a * x; });
}

VectorField VectorField::constant_matrix(const Mat& value, int in_dim) {
    VectorField f = native("constant_matrix", in_dim, static_cast<int>(value.rows()),
                           static_cast<int>(value.cols()), [value](const Vec&, Mat& out) { out = value; });
    f.matrix_ = true;
    return f;
}

void VectorField::evaluate(const Vec& x, Mat& out) const {
    if (x.size() != in_dim_) {
        throw EvaluationError("field '" + id_ + "' expects input of dimension " + std::to_string(in_dim_) +
                              ", got " + std::to_string(x.size()));
    }
    kernel_(x, out);
}

Vec VectorField::operator()(const Vec& x) const {
    Mat out;
    evaluate(x, out);
    return out.col(0);
}

Mat VectorField::matrix(const Vec& x) const {
    Mat out;
    evaluate(x, out);
    return out;
}

std::string VectorField::print() const {
    if (expressions_.empty()) return "registry:" + id_;
    std::string text;
    for (std::size_t i = 0; i < expressions_.size(); ++i) {
        if (i > 0) text += "; ";
        text += expressions_[i]->print();
    }
    return text;
}

}  // namespace sldp
