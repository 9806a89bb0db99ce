#include "sldp/zvonkin.hpp"

#include <Eigen/SVD>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sldp {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

int reflect(int k, int n) {
    if (k < 0) return -k;
    if (k > n - 1) return 2 * (n - 1) - k;
    return k;
}

ZvonkinNorms measure_norms(const GridFunction& u, const GridFunction& grad, const GridFunction& hess) {
    const int m = u.dim();
    const int c = u.components();
    ZvonkinNorms n;
    Eigen::MatrixXd J(c, m);
    for (std::size_t p = 0; p < u.node_count(); ++p) {
        double s = 0.0;
        for (int k = 0; k < c; ++k) s += u.at(p, k) * u.at(p, k);
        n.u = std::max(n.u, std::sqrt(s));

        for (int k = 0; k < c; ++k) {
            for (int a = 0; a < m; ++a) J(k, a) = grad.at(p, k * m + a);
        }
        const double spectral =
            (c == 1 || m == 1) ? J.norm() : Eigen::JacobiSVD<Eigen::MatrixXd>(J).singularValues()(0);
        n.grad = std::max(n.grad, spectral);

        double f = 0.0;
        for (int k = 0; k < hess.components(); ++k) f += hess.at(p, k) * hess.at(p, k);
        n.hess = std::max(n.hess, std::sqrt(f));
    }
    return n;
}

struct Discretization {
    Eigen::SparseMatrix<double> A;  // lambda I - L_h
    std::vector<Vec> nodes;
    std::vector<Vec> b;             // singular drift at nodes
};

Discretization discretize(const SdeProblem& problem, double lambda, const GridFunction& grid) {
    const int m = grid.dim();
    const int n = grid.resolution();
    const std::size_t N = grid.node_count();
    Discretization d;
    d.nodes.resize(N);
    d.b.resize(N);

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(N * static_cast<std::size_t>(1 + 2 * m + 4 * m * (m - 1) / 2));
    Mat sigma;
    for (std::size_t p = 0; p < N; ++p) {
        const Vec x = grid.node(p);
        d.nodes[p] = x;
        d.b[p] = problem.singular(x);
        problem.diffusion.evaluate(x, sigma);
        const Mat a = sigma * sigma.transpose();
        const auto idx = grid.multi_index(p);
        const auto row = static_cast<Eigen::Index>(p);
        triplets.emplace_back(row, row, lambda);
        for (int i = 0; i < m; ++i) {
            const double hi = grid.spacing(i);
            const double c = 0.5 * a(i, i) / (hi * hi);
            triplets.emplace_back(row, row, 2.0 * c);
            for (int step : {-1, 1}) {
                auto nb = idx;
                nb[i] = reflect(idx[i] + step, n);
                triplets.emplace_back(row, static_cast<Eigen::Index>(grid.node_index(nb)), -c);
            }
            for (int j = i + 1; j < m; ++j) {
                const double aij = 0.5 * (a(i, j) + a(j, i));
                if (aij == 0.0) continue;
                const double c2 = aij / (4.0 * hi * grid.spacing(j));
                for (int si : {-1, 1}) {
                    for (int sj : {-1, 1}) {
                        auto nb = idx;
                        nb[i] = reflect(idx[i] + si, n);
                        nb[j] = reflect(idx[j] + sj, n);
                        triplets.emplace_back(row, static_cast<Eigen::Index>(grid.node_index(nb)),
                                              -c2 * si * sj);
                    }
                }
            }
        }
    }
    d.A.resize(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    d.A.setFromTriplets(triplets.begin(), triplets.end());
    d.A.makeCompressed();
    return d;
}

/// b + (grad u) b at every node, component-major vectors.
std::vector<Eigen::VectorXd> picard_rhs(const Discretization& d, const GridFunction& u) {
    const int m = u.dim();
    const GridFunction g = u.gradient();
    const auto N = static_cast<Eigen::Index>(u.node_count());
    std::vector<Eigen::VectorXd> rhs(m, Eigen::VectorXd(N));
    for (Eigen::Index p = 0; p < N; ++p) {
        const Vec& b = d.b[static_cast<std::size_t>(p)];
        for (int k = 0; k < m; ++k) {
            double v = b[k];
            for (int a = 0; a < m; ++a) v += g.at(static_cast<std::size_t>(p), k * m + a) * b[a];
            rhs[k][p] = v;
        }
    }
    return rhs;
}

}  // namespace

ZvonkinMap::ZvonkinMap(double lambda, GridFunction u, double margin)
    : lambda_(lambda), margin_(margin), u_(std::move(u)) {
    grad_ = u_.gradient();
    hess_ = u_.hessian();
    interior_ = u_.box().shrunk(margin);
    norms_ = measure_norms(u_, grad_, hess_);
}

Mat ZvonkinMap::jacobian(const Vec& x) const {
    const int m = dim();
    double g[kMaxDim * kMaxDim];
    grad_.evaluate(x, g);
    Mat J = Mat::Identity(m, m);
    for (int k = 0; k < m; ++k) {
        for (int a = 0; a < m; ++a) J(k, a) += g[k * m + a];
    }
    return J;
}

Vec ZvonkinMap::theta(const Vec& x) const { return x + u_(x); }

Vec ZvonkinMap::theta_inv(const Vec& y, double tol, InverseTrace* trace) const {
    if (!certified()) throw DomainError("theta_inv needs a certified map (" + certificate() + ")");
    if (!box().contains(y, 1e-12)) {
        throw DomainError("theta_inv: point outside the map box " + box().describe());
    }
    Vec x = y;
    double previous = 0.0;
    for (int k = 0; k < 200; ++k) {
        Vec next;
        try {
            next = y - u_(x);
        } catch (const DomainError&) {
            throw DomainError("theta_inv: iterate left the map box; the point is not in the image of theta");
        }
        const double step = (next - x).norm();
        if (trace) {
            trace->steps.push_back(step);
            if (k > 0 && previous > 0.0) trace->ratios.push_back(step / previous);
        }
        x = next;
        if (!box().contains(x, 1e-12)) {
            throw DomainError("theta_inv: iterate left the map box; the point is not in the image of theta");
        }
        if (step < tol) return x;
        previous = step;
    }
    throw ConvergenceError("theta_inv did not converge in 200 iterations");
}

std::string ZvonkinMap::certificate() const {
    return "lambda=" + fmt(lambda_) + " norms=(" + fmt(norms_.u) + "," + fmt(norms_.grad) + "," + fmt(norms_.hess) +
           ") sum=" + fmt(norms_.sum()) + " certified=" + (certified() ? "true" : "false");
}

ZvonkinMap solve_resolvent(const SdeProblem& problem, double lambda, const ResolventOptions& options) {
    if (!(lambda > 0.0)) throw InputError("lambda must be positive");
    if (options.resolution < 17) throw InputError("resolvent grid needs at least 17 points per axis");
    const int m = problem.noise_dim();
    if (options.box.dim() != m) throw InputError("resolvent box must have the noisy-block dimension");

    GridFunction u(options.box, options.resolution, m);
    const Discretization d = discretize(problem, lambda, u);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(d.A);
    if (lu.info() != Eigen::Success) throw ConvergenceError("resolvent matrix factorization failed");

    const auto N = static_cast<Eigen::Index>(u.node_count());
    double update = 0.0;
    for (int it = 1; it <= options.max_iters; ++it) {
        const auto rhs = picard_rhs(d, u);
        update = 0.0;
        GridFunction next(options.box, options.resolution, m);
        for (int k = 0; k < m; ++k) {
            // Split off the value at node 0: constants are eigenvectors of
            // lambda - L_h, so constant data is solved exactly.
            const double f0 = rhs[k][0];
            const Eigen::VectorXd shifted = rhs[k].array() - f0;
            Eigen::VectorXd sol = Eigen::VectorXd::Zero(N);
            if (shifted.cwiseAbs().maxCoeff() > 0.0) {
                sol = lu.solve(shifted);
                if (lu.info() != Eigen::Success) throw ConvergenceError("resolvent linear solve failed");
            }
            for (Eigen::Index p = 0; p < N; ++p) {
                const double v = f0 / lambda + sol[p];
                next.at(static_cast<std::size_t>(p), k) = v;
                update = std::max(update, std::abs(v - u.at(static_cast<std::size_t>(p), k)));
            }
        }
        u = std::move(next);
        if (!std::isfinite(update) || update > 1e8) {
            throw ConvergenceError("Picard iteration diverged at lambda=" + fmt(lambda) + " (iteration " +
                                   std::to_string(it) + ", update " + fmt(update) + ")");
        }
        if (update < options.tol) {
            ZvonkinMap map(lambda, std::move(u), options.margin);
            map.set_solve_record(resolvent_residual(problem, map), it, update);
            return map;
        }
    }
    throw ConvergenceError("Picard iteration did not converge at lambda=" + fmt(lambda) + " within " +
                           std::to_string(options.max_iters) + " iterations (last update " + fmt(update) + ")");
}

double resolvent_residual(const SdeProblem& problem, const ZvonkinMap& map) {
    const GridFunction& u = map.u();
    const Discretization d = discretize(problem, map.lambda(), u);
    const auto rhs = picard_rhs(d, u);
    const int m = u.dim();
    const int n = u.resolution();
    const auto N = static_cast<Eigen::Index>(u.node_count());
    double worst = 0.0;
    for (int k = 0; k < m; ++k) {
        Eigen::VectorXd col(N);
        for (Eigen::Index p = 0; p < N; ++p) col[p] = u.at(static_cast<std::size_t>(p), k);
        const Eigen::VectorXd r = rhs[k] - d.A * col;
        for (Eigen::Index p = 0; p < N; ++p) {
            const auto idx = u.multi_index(static_cast<std::size_t>(p));
            bool interior = true;
            for (int a = 0; a < m; ++a) interior = interior && idx[a] > 0 && idx[a] < n - 1;
            if (interior) worst = std::max(worst, std::abs(r[p]));
        }
    }
    return worst;
}

std::string describe_ladder(const std::vector<LadderRung>& ladder) {
    std::ostringstream os;
    for (const auto& r : ladder) {
        os << "  lambda=" << fmt(r.lambda);
        if (r.converged) {
            os << " norms=(" << fmt(r.norms.u) << "," << fmt(r.norms.grad) << "," << fmt(r.norms.hess)
               << ") sum=" << fmt(r.norms.sum()) << " certified=" << (r.certified ? "true" : "false");
        } else {
            os << " not converged: " << r.note;
        }
        os << '\n';
    }
    return os.str();
}

LambdaSearch find_lambda0(const SdeProblem& problem, const ResolventOptions& options, double lambda_start,
                          double growth, double cap_factor) {
    if (!(lambda_start > 0.0)) throw InputError("lambda_start must be positive");
    if (!(growth > 1.0)) throw InputError("lambda growth factor must exceed 1");
    LambdaSearch search;
    const double cap = lambda_start * cap_factor;
    for (double lambda = lambda_start; lambda <= cap * (1.0 + 1e-12); lambda *= growth) {
        LadderRung rung;
        rung.lambda = lambda;
        try {
            auto map = std::make_shared<const ZvonkinMap>(solve_resolvent(problem, lambda, options));
            rung.converged = true;
            rung.iterations = map->iterations();
            rung.norms = map->norms();
            rung.certified = map->certified();
            search.ladder.push_back(rung);
            if (rung.certified) {
                search.lambda0 = lambda;
                search.map = std::move(map);
                return search;
            }
        } catch (const ConvergenceError& e) {
            rung.note = e.what();
            search.ladder.push_back(rung);
        }
    }
    throw CertificationError("no certified lambda up to " + fmt(cap) + "; norm trajectory:\n" +
                                 describe_ladder(search.ladder),
                             search.ladder);
}

TransformedSde::TransformedSde(SdeProblem problem, std::shared_ptr<const ZvonkinMap> map, double inverse_tol)
    : problem_(std::move(problem)), map_(std::move(map)), inverse_tol_(inverse_tol) {
    problem_.check_structure();
    if (!map_) throw InputError("transform needs a map");
    if (!map_->certified()) throw DomainError("transform needs a certified map (" + map_->certificate() + ")");
    const int off = problem_.noise_offset();
    const int m = problem_.noise_dim();
    if (map_->dim() != m) throw InputError("map dimension does not match the noisy block");
    domain_ = problem_.box;
    const double pad = map_->norms().u;
    for (int i = 0; i < m; ++i) {
        domain_.lo[off + i] = std::max(map_->interior().lo[i], problem_.box.lo[off + i]) - pad;
        domain_.hi[off + i] = std::min(map_->interior().hi[i], problem_.box.hi[off + i]) + pad;
    }
}

Vec TransformedSde::to_transformed(const Vec& state) const {
    const int off = problem_.noise_offset();
    const int m = problem_.noise_dim();
    Vec out = state;
    out.segment(off, m) = map_->theta(state.segment(off, m));
    return out;
}

Vec TransformedSde::to_original(const Vec& state) const {
    const int off = problem_.noise_offset();
    const int m = problem_.noise_dim();
    Vec out = state;
    out.segment(off, m) = map_->theta_inv(state.segment(off, m), inverse_tol_);
    return out;
}

void TransformedSde::evaluate(double eps, const Vec& z, Vec& drift, Mat* diffusion) const {
    const int off = problem_.noise_offset();
    const int m = problem_.noise_dim();
    const Vec x_full = to_original(z);
    const Vec x = x_full.segment(off, m);
    const Box& inner = map_->interior();
    for (int i = 0; i < m; ++i) {
        const double lo = std::max(inner.lo[i], problem_.box.lo[off + i]);
        const double hi = std::min(inner.hi[i], problem_.box.hi[off + i]);
        if (x[i] < lo || x[i] > hi) throw DomainError("transformed state maps outside the interior box");
    }
    problem_.drift.evaluate(eps, x_full, drift);
    const Mat J = map_->jacobian(x);
    Vec y_drift = J * drift.segment(off, m);
    if (eps != 0.0) y_drift += eps * map_->lambda() * map_->u_at(x);
    drift.segment(off, m) = y_drift;
    if (diffusion) {
        const Mat sigma = problem_.diffusion.matrix(x);
        *diffusion = J * sigma;
    }
}

double TransformedSde::transformed_ellipticity() const {
    const double g = map_->norms().grad;
    return problem_.ellipticity_K * std::max((1.0 + g) * (1.0 + g), 1.0 / ((1.0 - g) * (1.0 - g)));
}

void write_map(const ZvonkinMap& map, const std::filesystem::path& json_path, const std::filesystem::path& csv_path) {
    const GridFunction& u = map.u();
    nlohmann::ordered_json header;
    header["format_version"] = 1;
    header["box"] = {{"lo", to_std(u.box().lo)}, {"hi", to_std(u.box().hi)}};
    header["resolution"] = u.resolution();
    header["lambda"] = map.lambda();
    header["norms"] = {{"u", map.norms().u},
                       {"grad", map.norms().grad},
                       {"hess", map.norms().hess},
                       {"sum", map.norms().sum()}};
    header["residual"] = map.residual();
    header["iterations"] = map.iterations();
    header["certified"] = map.certified();
    header["margin"] = map.margin();
    header["values"] = csv_path.filename().string();

    std::ofstream js(json_path);
    if (!js) throw InputError("cannot write " + json_path.string());
    js << header.dump(2) << '\n';

    std::ofstream csv(csv_path);
    if (!csv) throw InputError("cannot write " + csv_path.string());
    const int m = u.dim();
    for (int a = 0; a < m; ++a) csv << (a ? "," : "") << 'x' << a + 1;
    for (int k = 0; k < u.components(); ++k) csv << ",u" << k + 1;
    csv << '\n';
    char buf[32];
    for (std::size_t p = 0; p < u.node_count(); ++p) {
        const Vec x = u.node(p);
        for (int a = 0; a < m; ++a) {
            std::snprintf(buf, sizeof buf, "%.17g", x[a]);
            csv << (a ? "," : "") << buf;
        }
        for (int k = 0; k < u.components(); ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", u.at(p, k));
            csv << ',' << buf;
        }
        csv << '\n';
    }
}

ZvonkinMap read_map(const std::filesystem::path& json_path) {
    std::ifstream js(json_path);
    if (!js) throw InputError("cannot open " + json_path.string());
    nlohmann::json header;
    try {
        js >> header;
        const Box box{make_vec(header.at("box").at("lo").get<std::vector<double>>()),
                      make_vec(header.at("box").at("hi").get<std::vector<double>>())};
        const int resolution = header.at("resolution").get<int>();
        const double lambda = header.at("lambda").get<double>();
        const double margin = header.at("margin").get<double>();
        const auto csv_path = json_path.parent_path() / header.at("values").get<std::string>();

        GridFunction u(box, resolution, box.dim());
        std::ifstream csv(csv_path);
        if (!csv) throw InputError("cannot open " + csv_path.string());
        std::string line;
        std::getline(csv, line);
        const int m = box.dim();
        for (std::size_t p = 0; p < u.node_count(); ++p) {
            if (!std::getline(csv, line)) throw InputError(csv_path.string() + ": too few rows");
            std::istringstream row(line);
            std::string cell;
            for (int col = 0; col < 2 * m; ++col) {
                if (!std::getline(row, cell, ',')) throw InputError(csv_path.string() + ": short row");
                if (col >= m) u.at(p, col - m) = std::stod(cell);
            }
        }
        ZvonkinMap map(lambda, std::move(u), margin);
        map.set_solve_record(header.value("residual", 0.0), header.value("iterations", 0), 0.0);
        return map;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(json_path.string() + ": " + e.what());
    }
}

}  // namespace sldp
