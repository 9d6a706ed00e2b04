#include "vsq/config.hpp"

#include <cmath>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <string>

namespace vsq {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw std::invalid_argument("config: " + where + ": " + what);
}

void require_object(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail(where, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) fail(where, "unknown key '" + it.key() + "'");
    }
}

const json& need(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) fail(where, std::string("missing key '") + key + "'");
    return j.at(key);
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(where, "expected a finite number");
    return v;
}

std::size_t count(const json& j, const std::string& where) {
    if (!j.is_number_integer() || j.get<long long>() < 0) fail(where, "expected a nonnegative integer");
    return j.get<std::size_t>();
}

bool boolean(const json& j, const std::string& where) {
    if (!j.is_boolean()) fail(where, "expected true or false");
    return j.get<bool>();
}

std::vector<double> numbers(const json& j, const std::string& where) {
    if (!j.is_array()) fail(where, "expected an array of numbers");
    std::vector<double> v;
    for (std::size_t k = 0; k < j.size(); ++k) v.push_back(number(j[k], where + "[" + std::to_string(k) + "]"));
    return v;
}

Eigen::VectorXd real_vector(const json& j, std::size_t m, const std::string& where) {
    const std::vector<double> v = numbers(j, where);
    if (v.size() != m) fail(where, "expected " + std::to_string(m) + " entries");
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(m));
}

std::vector<Eigen::VectorXcd> complex_vectors(const json& j, std::size_t m, const std::string& where) {
    if (!j.is_array()) fail(where, "expected an array of vectors");
    std::vector<Eigen::VectorXcd> out;
    for (std::size_t k = 0; k < j.size(); ++k)
        out.push_back(complex_vector_from_json(j[k], m, where + "[" + std::to_string(k) + "]"));
    return out;
}

std::optional<GridSpec> optional_grid(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) return std::nullopt;
    return grid_from_json(j.at(key), where + "." + key);
}

}  // namespace

KernelSpec kernel_from_json(const json& j, const std::string& where) {
    require_object(j, where, {"m", "components"});
    const json& comps = need(j, "components", where);
    if (!comps.is_array() || comps.empty()) fail(where + ".components", "expected a nonempty array");
    KernelSpec spec;
    for (std::size_t k = 0; k < comps.size(); ++k) {
        const std::string w = where + ".components[" + std::to_string(k) + "]";
        const json& c = comps[k];
        require_object(c, w, {"kind", "H", "lambda"});
        const json& kind = need(c, "kind", w);
        if (!kind.is_string()) fail(w + ".kind", "expected a string");
        try {
            switch (kernel_kind_from_string(kind.get<std::string>())) {
                case KernelKind::Fractional:
                    if (c.contains("lambda")) fail(w, "a fractional kernel takes no lambda");
                    spec.components.push_back(ScalarKernel::fractional(number(need(c, "H", w), w + ".H")));
                    break;
                case KernelKind::Gamma:
                    spec.components.push_back(ScalarKernel::gamma(number(need(c, "H", w), w + ".H"),
                                                                  number(need(c, "lambda", w), w + ".lambda")));
                    break;
                case KernelKind::Constant:
                    if (c.contains("H") || c.contains("lambda")) fail(w, "a constant kernel takes no parameters");
                    spec.components.push_back(ScalarKernel::constant());
                    break;
            }
        } catch (const std::invalid_argument& e) {
            const std::string msg = e.what();
            if (msg.rfind("config:", 0) == 0) throw;
            fail(w, msg);
        }
    }
    if (j.contains("m") && count(j.at("m"), where + ".m") != spec.m())
        fail(where + ".m", "does not match the number of components");
    return spec;
}

json kernel_to_json(const KernelSpec& spec) {
    json comps = json::array();
    for (const auto& k : spec.components) {
        json c = {{"kind", to_string(k.kind())}};
        if (k.kind() != KernelKind::Constant) c["H"] = k.H();
        if (k.kind() == KernelKind::Gamma) c["lambda"] = k.lambda();
        comps.push_back(c);
    }
    return {{"m", spec.m()}, {"components", comps}};
}

ModelParams model_from_json(const json& j, const std::string& where) {
    require_object(j, where, {"kernel", "b", "beta", "sigma", "x0"});
    ModelParams p;
    p.kernel = kernel_from_json(need(j, "kernel", where), where + ".kernel");
    const std::size_t m = p.kernel.m();
    p.b = real_vector(need(j, "b", where), m, where + ".b");
    p.sigma = real_vector(need(j, "sigma", where), m, where + ".sigma");
    p.x0 = real_vector(need(j, "x0", where), m, where + ".x0");
    const json& beta = need(j, "beta", where);
    if (!beta.is_array() || beta.size() != m) fail(where + ".beta", "expected " + std::to_string(m) + " rows");
    p.beta.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t r = 0; r < m; ++r)
        p.beta.row(static_cast<Eigen::Index>(r)) =
            real_vector(beta[r], m, where + ".beta[" + std::to_string(r) + "]").transpose();
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        fail(where, e.what());
    }
    return p;
}

json model_to_json(const ModelParams& p) {
    auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    json beta = json::array();
    for (Eigen::Index r = 0; r < p.beta.rows(); ++r) beta.push_back(vec(p.beta.row(r).transpose()));
    return {{"kernel", kernel_to_json(p.kernel)}, {"b", vec(p.b)}, {"beta", beta}, {"sigma", vec(p.sigma)}, {"x0", vec(p.x0)}};
}

GridSpec grid_from_json(const json& j, const std::string& where) {
    require_object(j, where, {"step", "horizon"});
    const double h = number(need(j, "step", where), where + ".step");
    const double T = number(need(j, "horizon", where), where + ".horizon");
    if (!(h > 0.0)) fail(where + ".step", "must be positive");
    if (!(T > 0.0)) fail(where + ".horizon", "must be positive");
    const double n = std::round(T / h);
    if (n < 1.0 || std::fabs(T / h - n) > 1e-6) fail(where, "horizon must be a whole number of steps");
    if (n > 1e8) fail(where, "too many steps");
    return GridSpec{h, static_cast<std::size_t>(n)};
}

cplx complex_from_json(const json& j, const std::string& where) {
    if (j.is_number()) return {number(j, where), 0.0};
    if (j.is_array() && j.size() == 2) return {number(j[0], where + "[0]"), number(j[1], where + "[1]")};
    fail(where, "expected a number or [re, im]");
}

Eigen::VectorXcd complex_vector_from_json(const json& j, std::size_t m, const std::string& where) {
    if (!j.is_array() || j.size() != m) fail(where, "expected " + std::to_string(m) + " complex entries");
    Eigen::VectorXcd v(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i)
        v(static_cast<Eigen::Index>(i)) = complex_from_json(j[i], where + "[" + std::to_string(i) + "]");
    return v;
}

MeasureForcing forcing_from_json(const json& j, std::size_t m, const std::string& where) {
    require_object(j, where, {"atoms", "density"});
    MeasureForcing f;
    if (j.contains("atoms")) {
        const json& atoms = j.at("atoms");
        if (!atoms.is_array()) fail(where + ".atoms", "expected an array");
        for (std::size_t k = 0; k < atoms.size(); ++k) {
            const std::string w = where + ".atoms[" + std::to_string(k) + "]";
            require_object(atoms[k], w, {"time", "weight"});
            f.atoms.push_back({number(need(atoms[k], "time", w), w + ".time"),
                               complex_vector_from_json(need(atoms[k], "weight", w), m, w + ".weight")});
        }
    }
    if (j.contains("density")) f.density = complex_vectors(j.at("density"), m, where + ".density");
    try {
        f.validate(m);
    } catch (const std::invalid_argument& e) {
        fail(where, e.what());
    }
    return f;
}

RunConfig parse_config(const json& j) {
    require_object(j, "top level", {"model", "grid", "seed", "output", "resolvent", "riccati", "cf", "limit", "stationary",
                                 "acov", "simulation", "density", "check"});
    RunConfig c;
    c.model = model_from_json(need(j, "model", "top level"));
    const std::size_t m = c.model.m();
    c.grid = optional_grid(j, "grid", "top level");
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned() && !(j.at("seed").is_number_integer() && j.at("seed").get<long long>() >= 0))
            fail("seed", "expected a nonnegative integer");
        c.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("output")) {
        if (!j.at("output").is_string() || j.at("output").get<std::string>().empty()) fail("output", "expected a nonempty string");
        c.output = j.at("output").get<std::string>();
    }
    if (j.contains("resolvent")) {
        const json& b = j.at("resolvent");
        require_object(b, "resolvent", {"richardson", "transpose"});
        ResolventBlock r;
        if (b.contains("richardson")) r.richardson = boolean(b.at("richardson"), "resolvent.richardson");
        if (b.contains("transpose")) r.transpose = boolean(b.at("transpose"), "resolvent.transpose");
        c.resolvent = r;
    }
    if (j.contains("riccati")) {
        const json& b = j.at("riccati");
        require_object(b, "riccati", {"forcing"});
        c.riccati = RiccatiBlock{forcing_from_json(need(b, "forcing", "riccati"), m, "riccati.forcing")};
    }
    if (j.contains("cf")) {
        const json& b = j.at("cf");
        require_object(b, "cf", {"t", "forcing"});
        CfBlock cf;
        cf.t = number(need(b, "t", "cf"), "cf.t");
        if (!(cf.t >= 0.0)) fail("cf.t", "must be >= 0");
        if (b.contains("forcing")) cf.forcing = forcing_from_json(b.at("forcing"), m, "cf.forcing");
        c.cf = cf;
    }
    if (j.contains("limit")) {
        const json& b = j.at("limit");
        require_object(b, "limit", {"u", "resolvent_grid", "riccati_grid"});
        LimitBlock l;
        if (b.contains("u")) l.u = complex_vectors(b.at("u"), m, "limit.u");
        l.resolvent_grid = optional_grid(b, "resolvent_grid", "limit");
        l.riccati_grid = optional_grid(b, "riccati_grid", "limit");
        c.limit = l;
    }
    if (j.contains("stationary")) {
        const json& b = j.at("stationary");
        require_object(b, "stationary", {"times", "weights", "resolvent_grid", "riccati_grid"});
        StationaryBlock s;
        s.times = numbers(need(b, "times", "stationary"), "stationary.times");
        s.weights = complex_vectors(need(b, "weights", "stationary"), m, "stationary.weights");
        if (s.times.empty() || s.times.size() != s.weights.size())
            fail("stationary", "times and weights must be nonempty and of equal length");
        s.resolvent_grid = optional_grid(b, "resolvent_grid", "stationary");
        s.riccati_grid = optional_grid(b, "riccati_grid", "stationary");
        c.stationary = s;
    }
    if (j.contains("acov")) {
        const json& b = j.at("acov");
        require_object(b, "acov", {"lags", "grid"});
        AcovBlock a;
        a.lags = numbers(need(b, "lags", "acov"), "acov.lags");
        for (double l : a.lags)
            if (!(l >= 0.0)) fail("acov.lags", "lags must be >= 0");
        a.grid = optional_grid(b, "grid", "acov");
        c.acov = a;
    }
    if (j.contains("simulation")) {
        const json& b = j.at("simulation");
        require_object(b, "simulation",
                       {"paths", "scheme", "threads", "record_stride", "dump", "cf_u", "cf_time", "holder_lags", "holder_p"});
        SimulationBlock s;
        if (b.contains("paths")) s.paths = count(b.at("paths"), "simulation.paths");
        if (s.paths < 1) fail("simulation.paths", "must be >= 1");
        if (b.contains("scheme")) {
            if (!b.at("scheme").is_string()) fail("simulation.scheme", "expected a string");
            try {
                s.scheme = scheme_from_string(b.at("scheme").get<std::string>());
            } catch (const std::invalid_argument& e) {
                fail("simulation.scheme", e.what());
            }
        }
        if (b.contains("threads")) s.threads = static_cast<unsigned>(count(b.at("threads"), "simulation.threads"));
        if (s.threads < 1) fail("simulation.threads", "must be >= 1");
        if (b.contains("record_stride")) s.record_stride = count(b.at("record_stride"), "simulation.record_stride");
        if (s.record_stride < 1) fail("simulation.record_stride", "must be >= 1");
        if (b.contains("dump")) s.dump = boolean(b.at("dump"), "simulation.dump");
        if (b.contains("cf_u")) s.cf_u = complex_vectors(b.at("cf_u"), m, "simulation.cf_u");
        if (b.contains("cf_time")) s.cf_time = number(b.at("cf_time"), "simulation.cf_time");
        if (b.contains("holder_lags")) s.holder_lags = numbers(b.at("holder_lags"), "simulation.holder_lags");
        if (b.contains("holder_p")) s.holder_p = number(b.at("holder_p"), "simulation.holder_p");
        if (!(s.holder_p >= 2.0)) fail("simulation.holder_p", "must be >= 2");
        c.simulation = s;
    }
    if (j.contains("density")) {
        const json& b = j.at("density");
        require_object(b, "density", {"time", "limit", "bins", "epsilon", "shifts"});
        DensityBlock d;
        d.time = number(need(b, "time", "density"), "density.time");
        if (!(d.time >= 0.0)) fail("density.time", "must be >= 0");
        if (b.contains("limit")) d.limit = boolean(b.at("limit"), "density.limit");
        if (b.contains("bins")) d.bins = count(b.at("bins"), "density.bins");
        if (b.contains("epsilon")) d.epsilon = number(b.at("epsilon"), "density.epsilon");
        if (d.epsilon < 0.0) fail("density.epsilon", "must be >= 0");
        if (b.contains("shifts")) d.shifts = numbers(b.at("shifts"), "density.shifts");
        c.density = d;
    }
    if (j.contains("check")) {
        const json& b = j.at("check");
        require_object(b, "check", {"trials"});
        CheckBlock k;
        if (b.contains("trials")) k.trials = count(b.at("trials"), "check.trials");
        c.check = k;
    }
    return c;
}

}  // namespace vsq
