#include "sldp/types.hpp"

#include <sstream>

namespace sldp {

Box Box::cube(int dim, double lo, double hi) {
    return Box{Vec::Constant(dim, lo), Vec::Constant(dim, hi)};
}

bool Box::contains(const Vec& x, double slack) const {
    if (x.size() != lo.size()) return false;
    for (int i = 0; i < x.size(); ++i) {
        if (!(x[i] >= lo[i] - slack && x[i] <= hi[i] + slack)) return false;
    }
    return true;
}

Box Box::shrunk(double fraction) const {
    const Vec w = width();
    return Box{lo + fraction * w, hi - fraction * w};
}

Box Box::block(int offset, int count) const {
    return Box{lo.segment(offset, count), hi.segment(offset, count)};
}

std::string Box::describe() const {
    std::ostringstream os;
    os.precision(10);
    for (int i = 0; i < dim(); ++i) {
        if (i > 0) os << " x ";
        os << '[' << lo[i] << ", " << hi[i] << ']';
    }
    return os.str();
}

Vec make_vec(std::initializer_list<double> values) {
    Vec v(static_cast<int>(values.size()));
    int i = 0;
    for (double x : values) v[i++] = x;
    return v;
}

Vec make_vec(const std::vector<double>& values) {
    Vec v(static_cast<int>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<int>(i)] = values[i];
    return v;
}

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace sldp
