#include "sldp/problem_file.hpp"

#include "sldp/errors.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace sldp {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string strip_comment(std::string_view line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return std::string(line.substr(0, i));
    }
    return std::string(line);
}

class Reader {
public:
    Reader(const KeyValueDocument& doc, std::string source) : doc_(doc), source_(std::move(source)) {}

    bool has_section(const std::string& section) const { return doc_.count(section) > 0; }

    std::optional<std::string> get(const std::string& section, const std::string& key) const {
        auto s = doc_.find(section);
        if (s == doc_.end()) return std::nullopt;
        auto k = s->second.find(key);
        if (k == s->second.end()) return std::nullopt;
        used_.insert(section + "." + key);
        return k->second;
    }

    std::string require(const std::string& section, const std::string& key) const {
        auto v = get(section, key);
        if (!v) fail("missing key '" + key + "' in section [" + section + "]");
        return *v;
    }

    double number(const std::string& section, const std::string& key, std::optional<double> fallback = {}) const {
        auto v = get(section, key);
        if (!v) {
            if (fallback) return *fallback;
            fail("missing key '" + key + "' in section [" + section + "]");
        }
        return parse_number(*v, section + "." + key);
    }

    long integer(const std::string& section, const std::string& key, std::optional<long> fallback = {}) const {
        const double v = number(section, key, fallback ? std::optional<double>(static_cast<double>(*fallback))
                                                       : std::nullopt);
        if (v != static_cast<double>(static_cast<long>(v))) fail(section + "." + key + " must be an integer");
        return static_cast<long>(v);
    }

    std::vector<double> numbers(const std::string& section, const std::string& key) const {
        const std::string text = require(section, key);
        std::vector<double> out;
        std::istringstream in(text);
        std::string token;
        while (in >> token) {
            if (token.back() == ',') token.pop_back();
            if (!token.empty()) out.push_back(parse_number(token, section + "." + key));
        }
        if (out.empty()) fail(section + "." + key + " is empty");
        return out;
    }

    double parse_number(const std::string& text, const std::string& what) const {
        double value = 0.0;
        const char* begin = text.data();
        const char* end = begin + text.size();
        auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc() || ptr != end) fail(what + ": '" + text + "' is not a number");
        return value;
    }

    Box box(const std::string& section, const std::string& key, int dim) const {
        const auto v = numbers(section, key);
        if (v.size() == 2) return Box::cube(dim, v[0], v[1]);
        if (v.size() != static_cast<std::size_t>(2 * dim)) {
            fail(section + "." + key + " needs 'lo hi' or 'lo1 hi1 ... lo" + std::to_string(dim) + " hi" +
                 std::to_string(dim) + "'");
        }
        Box b{Vec(dim), Vec(dim)};
        for (int i = 0; i < dim; ++i) {
            b.lo[i] = v[2 * i];
            b.hi[i] = v[2 * i + 1];
            if (!(b.lo[i] < b.hi[i])) fail(section + "." + key + " has an empty side");
        }
        return b;
    }

    void check_all_used() const {
        for (const auto& [section, keys] : doc_) {
            for (const auto& [key, value] : keys) {
                if (!used_.count(section + "." + key)) fail("unknown key '" + key + "' in section [" + section + "]");
            }
        }
    }

    [[noreturn]] void fail(const std::string& message) const { throw InputError(source_ + ": " + message); }

private:
    const KeyValueDocument& doc_;
    std::string source_;
    mutable std::set<std::string> used_;
};

Modulus read_modulus(const Reader& r) {
    const std::string kind = r.require("modulus", "kind");
    const double scale = r.number("modulus", "scale", 1.0);
    if (kind == "dini_log") {
        const double beta = r.number("modulus", "beta");
        if (!(beta > 0.0)) r.fail("modulus.beta must be positive");
        return Modulus::dini_log(beta, scale);
    }
    if (kind == "holder") {
        const double alpha = r.number("modulus", "alpha");
        if (!(alpha > 0.0 && alpha < 1.0)) r.fail("modulus.alpha must lie in (0, 1)");
        return Modulus::holder(alpha, scale);
    }
    if (kind == "lipschitz") {
        const double L = r.number("modulus", "L");
        if (!(L >= 0.0)) r.fail("modulus.L must be nonnegative");
        return Modulus::lipschitz(L);
    }
    if (kind == "expression") return Modulus::expression(r.require("modulus", "expression"));
    r.fail("unknown modulus kind '" + kind + "'");
}

VectorField read_singular(const Reader& r, int m) {
    auto field = r.get("singular", "field");
    auto registry = r.get("singular", "registry");
    if (field && registry) r.fail("[singular] takes either 'field' or 'registry', not both");
    VectorField f;
    if (registry) {
        if (*registry == "zero") {
            f = VectorField::zero(m, m);
            f.set_modulus(Modulus::lipschitz(0.0));
        } else if (*registry == "dini_tanhlog") {
            f = dini_tanhlog_field(m, r.number("singular", "beta"));
        } else if (*registry == "holder_sign") {
            f = holder_sign_field(m, r.number("singular", "alpha"));
        } else {
            r.fail("unknown singular registry field '" + *registry + "'");
        }
    } else if (field) {
        f = VectorField::from_expression(*field, m, m);
    } else {
        f = VectorField::zero(m, m);
        f.set_modulus(Modulus::lipschitz(0.0));
    }
    if (r.has_section("modulus")) f.set_modulus(read_modulus(r));
    if (auto bound = r.get("singular", "bound")) f.set_bound(r.parse_number(*bound, "singular.bound"));
    if (!f.declared_modulus()) r.fail("the singular drift needs a [modulus] section");
    return f;
}

}  // namespace

KeyValueDocument parse_key_value(std::string_view text, const std::string& source) {
    KeyValueDocument doc;
    std::string section;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        const std::string line = trim(strip_comment(text.substr(pos, eol - pos)));
        pos = eol + 1;
        ++line_no;
        auto fail = [&](const std::string& message) {
            throw InputError(source + ":" + std::to_string(line_no) + ": " + message);
        };
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail("unterminated section header");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (section.empty()) fail("empty section name");
            if (doc.count(section)) fail("duplicate section [" + section + "]");
            doc[section];
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) fail("expected 'key = value'");
        if (section.empty()) fail("key outside of any section");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) fail("empty key");
        if (!value.empty() && value.front() == '"') {
            if (value.size() < 2 || value.back() != '"') fail("unterminated string");
            value = value.substr(1, value.size() - 2);
        }
        auto& keys = doc[section];
        if (keys.count(key)) fail("duplicate key '" + key + "'");
        keys[key] = value;
    }
    return doc;
}

ProblemBundle problem_from_document(const KeyValueDocument& doc, const std::string& source) {
    Reader r(doc, source);
    for (const char* s : {"problem", "drift", "diffusion"}) {
        if (!r.has_section(s)) r.fail(std::string("missing section [") + s + "]");
    }

    ProblemBundle bundle;
    SdeProblem& p = bundle.problem;
    p.name = r.get("problem", "name").value_or(source);
    const std::string layout = r.get("problem", "layout").value_or("nondegenerate");
    if (layout == "nondegenerate") {
        p.layout = Layout::nondegenerate;
    } else if (layout == "degenerate") {
        p.layout = Layout::degenerate;
    } else {
        r.fail("layout must be 'nondegenerate' or 'degenerate'");
    }
    p.state_dim = static_cast<int>(r.integer("problem", "dim"));
    if (p.state_dim < 1 || p.state_dim > kMaxDim) r.fail("problem.dim must lie in [1, " + std::to_string(kMaxDim) + "]");
    if (p.layout == Layout::degenerate) {
        p.d1 = static_cast<int>(r.integer("problem", "d1"));
        if (p.d1 < 1 || p.d1 >= p.state_dim) r.fail("problem.d1 must lie in [1, dim)");
    }
    const int n = p.state_dim;
    const int m = p.noise_dim();
    p.horizon = r.number("problem", "horizon", 1.0);
    if (r.get("problem", "start")) {
        const auto start = r.numbers("problem", "start");
        if (start.size() != static_cast<std::size_t>(n)) r.fail("problem.start needs " + std::to_string(n) + " values");
        p.start = make_vec(start);
    } else {
        p.start = Vec::Zero(n);
    }
    p.box = r.get("problem", "box") ? r.box("problem", "box", n) : Box::cube(n, -5.0, 5.0);
    p.ellipticity_K = r.number("problem", "ellipticity_K", 2.0);
    if (r.get("problem", "lipschitz_L")) p.lipschitz_L = r.number("problem", "lipschitz_L");

    p.drift.limit = VectorField::from_expression(r.require("drift", "limit"), n, n);
    if (auto pert = r.get("drift", "perturbation")) p.drift.perturbation = VectorField::from_expression(*pert, n, n);
    p.drift.rate = r.number("drift", "rate", 1.0);

    p.singular = read_singular(r, m);
    p.diffusion = VectorField::from_expression(r.require("diffusion", "field"), m, m, m);
    p.diffusion.set_matrix(true);

    ExperimentDefaults& e = bundle.experiment;
    if (p.layout == Layout::degenerate) e.event_coordinate = p.d1;
    if (r.has_section("experiment")) {
        e.event_coordinate = static_cast<int>(r.integer("experiment", "event_coordinate", e.event_coordinate + 1)) - 1;
        if (e.event_coordinate < 0 || e.event_coordinate >= n) r.fail("experiment.event_coordinate out of range");
        e.event_threshold = r.number("experiment", "event_threshold", e.event_threshold);
        if (r.get("experiment", "eps_ladder")) e.eps_ladder = r.numbers("experiment", "eps_ladder");
        e.n_paths = r.integer("experiment", "n_paths", e.n_paths);
        e.n_steps = static_cast<int>(r.integer("experiment", "n_steps", e.n_steps));
        if (r.get("experiment", "rate_target")) e.rate_target = make_vec(r.numbers("experiment", "rate_target"));
        e.conjugacy_eps = r.number("experiment", "conjugacy_eps", e.conjugacy_eps);
        e.conjugacy_steps = static_cast<int>(r.integer("experiment", "conjugacy_steps", e.conjugacy_steps));
    }
    if (e.rate_target.size() == 0) {
        e.rate_target = Vec::Zero(m);
        e.rate_target[e.event_coordinate - p.noise_offset() >= 0 ? e.event_coordinate - p.noise_offset() : 0] =
            e.event_threshold;
    }
    if (e.rate_target.size() != m) r.fail("experiment.rate_target needs " + std::to_string(m) + " values");

    e.zvonkin_box = Box::cube(m, -6.0, 6.0);
    e.resolution = m == 1 ? 1201 : 65;
    if (r.has_section("zvonkin")) {
        if (r.get("zvonkin", "box")) e.zvonkin_box = r.box("zvonkin", "box", m);
        e.resolution = static_cast<int>(r.integer("zvonkin", "resolution", e.resolution));
        e.margin = r.number("zvonkin", "margin", e.margin);
        e.lambda_start = r.number("zvonkin", "lambda_start", e.lambda_start);
        e.lambda_growth = r.number("zvonkin", "lambda_growth", e.lambda_growth);
    }
    if (e.resolution < 17) r.fail("zvonkin.resolution must be at least 17");
    if (!(e.margin >= 0.0 && e.margin < 0.5)) r.fail("zvonkin.margin must lie in [0, 0.5)");

    r.check_all_used();
    p.check_structure();
    return bundle;
}

ProblemBundle load_problem_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open problem file '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return problem_from_document(parse_key_value(text.str(), path.string()), path.string());
}

ProblemBundle resolve_problem(std::string_view name_or_path) {
    if (is_registry_name(name_or_path)) return registry_problem(name_or_path);
    const std::filesystem::path path(name_or_path);
    if (!std::filesystem::exists(path)) {
        std::string names;
        for (const auto& n : registry_names()) names += (names.empty() ? "" : ", ") + n;
        throw InputError("'" + std::string(name_or_path) + "' is neither a problem file nor a registry name (" +
                         names + ")");
    }
    return load_problem_file(path);
}

}  // namespace sldp
