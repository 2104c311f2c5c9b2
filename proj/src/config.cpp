#include "fv/config.hpp"

#include "fv/errors.hpp"
#include "fv/rng.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace fv {

using nlohmann::json;

namespace {

[[noreturn]] void schema_fail(const std::string& path, const std::string& msg) {
    throw SchemaError(path + ": " + msg);
}

const json& field(const json& j, const char* key, const std::string& path) {
    if (!j.is_object()) schema_fail(path, "expected an object");
    const auto it = j.find(key);
    if (it == j.end()) schema_fail(path + "/" + key, "missing required field");
    return *it;
}

const json* opt_field(const json& j, const char* key) {
    if (!j.is_object()) return nullptr;
    const auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

int get_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) schema_fail(path, "expected an integer");
    return j.get<int>();
}

double get_double(const json& j, const std::string& path) {
    if (!j.is_number()) schema_fail(path, "expected a number");
    return j.get<double>();
}

std::string get_string(const json& j, const std::string& path) {
    if (!j.is_string()) schema_fail(path, "expected a string");
    return j.get<std::string>();
}

Cell parse_cell(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) schema_fail(path, "expected a [x, t] pair");
    return Cell{get_int(j[0], path + "/0"), get_int(j[1], path + "/1")};
}

Region parse_region(const json& j, const std::string& path) {
    if (!j.is_array()) schema_fail(path, "expected an array of cells");
    Region out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.insert(parse_cell(j[i], path + "/" + std::to_string(i)));
    return out;
}

Matrix parse_inline_matrix(const json& j, Eigen::Index dim, const std::string& path) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != dim * dim)
        schema_fail(path, "expected a row-major array of " + std::to_string(dim * dim) +
                              " [re, im] entries");
    Matrix m(dim, dim);
    for (Eigen::Index i = 0; i < dim * dim; ++i) {
        const json& e = j[static_cast<std::size_t>(i)];
        const std::string epath = path + "/" + std::to_string(i);
        if (!e.is_array() || e.size() != 2) schema_fail(epath, "expected a [re, im] pair");
        m(i / dim, i % dim) = Complex(get_double(e[0], epath), get_double(e[1], epath));
    }
    return m;
}

Matrix swap_gate(Eigen::Index d) {
    Matrix m = Matrix::Zero(d * d, d * d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) m(i * d + j, j * d + i) = 1.0;
    return m;
}

Matrix partial_swap_gate(Eigen::Index d, double theta) {
    const Eigen::Index dd = d * d;
    return std::cos(theta) * Matrix::Identity(dd, dd) -
           Complex(0.0, std::sin(theta)) * swap_gate(d);
}

Matrix cphase_gate(Eigen::Index da, Eigen::Index db, double phi) {
    Matrix m = Matrix::Identity(da * db, da * db);
    m(da * db - 1, da * db - 1) = std::exp(Complex(0.0, phi));
    return m;
}

Matrix cnot_gate(Eigen::Index da, Eigen::Index db, const std::string& path) {
    if (da != 2 || db != 2) schema_fail(path, "cnot preset needs two qubits");
    Matrix m = Matrix::Identity(4, 4);
    m(2, 2) = m(3, 3) = 0.0;
    m(2, 3) = m(3, 2) = 1.0;
    return m;
}

// unitary on two slots of dimensions (da, db), first slot most significant
Matrix parse_two_slot_unitary(const json& j, Eigen::Index da, Eigen::Index db, Rng& rng,
                              const std::string& path) {
    const Eigen::Index dim = da * db;
    Matrix m;
    if (j.is_string()) {
        const std::string name = j.get<std::string>();
        if (name == "random") {
            m = random_unitary(dim, rng);
        } else if (name == "identity") {
            m = Matrix::Identity(dim, dim);
        } else if (name == "swap") {
            if (da != db) schema_fail(path, "swap preset needs equal slot dimensions");
            m = swap_gate(da);
        } else if (name == "cnot") {
            m = cnot_gate(da, db, path);
        } else {
            schema_fail(path, "unknown gate preset '" + name + "'");
        }
    } else if (const json* preset = opt_field(j, "preset")) {
        const std::string name = get_string(*preset, path + "/preset");
        if (name == "partial_swap") {
            if (da != db) schema_fail(path, "partial_swap needs equal slot dimensions");
            m = partial_swap_gate(da, get_double(field(j, "theta", path), path + "/theta"));
        } else if (name == "cphase") {
            m = cphase_gate(da, db, get_double(field(j, "phi", path), path + "/phi"));
        } else {
            schema_fail(path, "unknown gate preset '" + name + "'");
        }
    } else if (const json* inl = opt_field(j, "matrix")) {
        m = parse_inline_matrix(*inl, dim, path + "/matrix");
    } else {
        schema_fail(path, "expected a preset name or an inline matrix");
    }
    if ((m * m.adjoint() - Matrix::Identity(dim, dim)).norm() > 1e-9)
        throw PhysicsValidationError(path + ": gate is not unitary");
    return m;
}

Matrix parse_density(const json& j, Eigen::Index dim, Rng& rng, const std::string& path,
                     bool probe) {
    Matrix m;
    if (j.is_string()) {
        const std::string name = j.get<std::string>();
        if (name == "all_zero" || name == "zero") {
            m = Matrix::Zero(dim, dim);
            m(0, 0) = 1.0;
        } else if (probe && name == "one") {
            if (dim < 2) schema_fail(path, "'one' needs dim >= 2");
            m = Matrix::Zero(dim, dim);
            m(1, 1) = 1.0;
        } else if (probe && name == "plus") {
            if (dim != 2) schema_fail(path, "'plus' needs a qubit");
            m = Matrix::Constant(2, 2, 0.5);
        } else if (name == "maximally_mixed") {
            m = Matrix::Identity(dim, dim) / static_cast<double>(dim);
        } else if (name == "random") {
            m = random_density_matrix(dim, rng);
        } else if (name == "random_pure") {
            m = random_pure_density(dim, rng);
        } else {
            schema_fail(path, "unknown state preset '" + name + "'");
        }
    } else if (const json* inl = opt_field(j, "matrix")) {
        m = parse_inline_matrix(*inl, dim, path + "/matrix");
    } else {
        schema_fail(path, "expected a state preset name or an inline matrix");
    }
    const SpectralCheck c = check_density(m, 1e-9);
    if (!c.ok) throw PhysicsValidationError(path + ": " + c.reason);
    return m;
}

Matrix parse_observable(const json& j, Eigen::Index dim, Rng& rng, const std::string& path) {
    Matrix m;
    if (j.is_string()) {
        const std::string name = j.get<std::string>();
        if (name == "identity") {
            m = Matrix::Identity(dim, dim);
        } else if (name == "random") {
            m = random_hermitian(dim, rng);
        } else if (name == "random_effect") {
            m = random_effect_matrix(dim, rng);
        } else if (name == "Z" || name == "X" || name == "Y" || name == "P0" || name == "P1") {
            if (dim != 2) schema_fail(path, "Pauli presets need a qubit");
            m = Matrix::Zero(2, 2);
            if (name == "Z") {
                m(0, 0) = 1.0;
                m(1, 1) = -1.0;
            } else if (name == "X") {
                m(0, 1) = m(1, 0) = 1.0;
            } else if (name == "Y") {
                m(0, 1) = Complex(0.0, -1.0);
                m(1, 0) = Complex(0.0, 1.0);
            } else if (name == "P0") {
                m(0, 0) = 1.0;
            } else {
                m(1, 1) = 1.0;
            }
        } else {
            schema_fail(path, "unknown observable preset '" + name + "'");
        }
    } else if (const json* inl = opt_field(j, "matrix")) {
        m = parse_inline_matrix(*inl, dim, path + "/matrix");
    } else {
        schema_fail(path, "expected an observable preset name or an inline matrix");
    }
    if (!is_hermitian(m, 1e-9))
        throw PhysicsValidationError(path + ": observable is not Hermitian");
    return m;
}

SystemSpec parse_system(const json& j, Rng& rng, const std::string& path) {
    const int width = get_int(field(j, "width", path), path + "/width");
    const int depth = get_int(field(j, "depth", path), path + "/depth");
    if (width < 1 || depth < 1) schema_fail(path, "width and depth must be positive");
    int site_dim = 2;
    if (const json* sd = opt_field(j, "site_dim")) site_dim = get_int(*sd, path + "/site_dim");
    if (site_dim < 2) schema_fail(path + "/site_dim", "site_dim must be >= 2");
    const Lattice lat(width, depth);
    const json& gates = field(j, "gates", path);
    SystemSpec spec;
    if (gates.is_string() && gates.get<std::string>() == "random") {
        Rng sys_rng = rng.stream("system-gates");
        spec = make_random_brickwork(lat, site_dim, sys_rng);
    } else {
        spec = make_brickwork(
            lat, site_dim,
            parse_two_slot_unitary(gates, site_dim, site_dim, rng, path + "/gates"));
    }
    validate_system(spec, 1e-9);
    return spec;
}

ObserverSpec parse_observer(const json& j, const SystemSpec& spec, Rng& rng,
                            const std::string& path) {
    ObserverSpec obs;
    obs.name = get_string(field(j, "name", path), path + "/name");
    const json& pj = field(j, "probe", path);
    const std::string ppath = path + "/probe";
    obs.probe.id = get_string(field(pj, "id", ppath), ppath + "/id");
    obs.probe.dim = 2;
    if (const json* d = opt_field(pj, "dim")) obs.probe.dim = get_int(*d, ppath + "/dim");
    if (obs.probe.dim < 1) schema_fail(ppath + "/dim", "dim must be positive");
    if (const json* nl = opt_field(pj, "nonlocal")) {
        if (!nl->is_boolean()) schema_fail(ppath + "/nonlocal", "expected a boolean");
        obs.probe.nonlocal = nl->get<bool>();
    }
    obs.probe.initial_state =
        parse_density(field(pj, "initial_state", ppath), obs.probe.dim, rng,
                      ppath + "/initial_state", /*probe=*/true);
    const json& cj = field(pj, "couplings", ppath);
    if (!cj.is_array()) schema_fail(ppath + "/couplings", "expected an array");
    for (std::size_t i = 0; i < cj.size(); ++i) {
        const std::string cpath = ppath + "/couplings/" + std::to_string(i);
        Coupling c;
        c.cell = parse_cell(field(cj[i], "cell", cpath), cpath + "/cell");
        c.gate = parse_two_slot_unitary(field(cj[i], "gate", cpath), spec.site_dim,
                                        obs.probe.dim, rng, cpath + "/gate");
        obs.probe.couplings.push_back(std::move(c));
    }
    obs.observable = parse_observable(field(j, "observable", path), obs.probe.dim, rng,
                                      path + "/observable");
    validate_probe(obs.probe, spec, 1e-9);
    return obs;
}

DensityState parse_omega(const json& root, const SystemSpec& spec, Rng& rng) {
    const Eigen::Index dim = system_layout(spec).total_dim();
    Matrix m;
    if (const json* st = opt_field(root, "initial_state"))
        m = parse_density(*st, dim, rng, "/initial_state", /*probe=*/false);
    else
        m = Matrix::Identity(dim, dim) / static_cast<double>(dim);
    return make_density_state(make_operator(std::move(m), system_layout(spec)));
}

Operator parse_charlie_observable(const json& j, const SystemSpec& spec, const Region& region,
                                  Rng& rng, const std::string& path) {
    const Cell cell = parse_cell(field(j, "cell", path), path + "/cell");
    if (!region.contains(cell)) schema_fail(path + "/cell", "cell is not in charlie's region");
    const Matrix site =
        parse_observable(field(j, "site_matrix", path), spec.site_dim, rng,
                         path + "/site_matrix");
    return heisenberg_pullback(spec, site, cell.x, cell.t);
}

SorkinConfig build_sorkin(const ExperimentConfig& cfg, Rng& rng) {
    SorkinConfig sc;
    sc.system = parse_system(field(cfg.raw, "system", ""), rng, "/system");
    sc.alice = parse_observer(field(cfg.raw, "alice", ""), sc.system, rng, "/alice");
    sc.bob = parse_observer(field(cfg.raw, "bob", ""), sc.system, rng, "/bob");
    const json& ch = field(cfg.raw, "charlie", "");
    sc.charlie_region = parse_region(field(ch, "region", "/charlie"), "/charlie/region");
    sc.charlie_observable = parse_charlie_observable(
        field(ch, "observable", "/charlie"), sc.system, sc.charlie_region, rng,
        "/charlie/observable");
    sc.omega = parse_omega(cfg.raw, sc.system, rng);
    sc.tol = cfg.tolerance;
    sc.seed = cfg.seed;
    return sc;
}

std::vector<ObserverSpec> build_observers(const ExperimentConfig& cfg, const SystemSpec& spec,
                                          Rng& rng) {
    const json& oj = field(cfg.raw, "observers", "");
    if (!oj.is_array() || oj.empty()) schema_fail("/observers", "expected a non-empty array");
    std::vector<ObserverSpec> out;
    for (std::size_t i = 0; i < oj.size(); ++i)
        out.push_back(parse_observer(oj[i], spec, rng, "/observers/" + std::to_string(i)));
    return out;
}

struct TrialRow {
    int trial = 0;
    double delta = 0.0;
    double operator_delta = 0.0;
    bool pass = false;
    std::string note;
};

TrialRow run_trial(const ExperimentConfig& cfg, ExperimentKind kind, int trial) {
    Rng rng = Rng(cfg.seed).stream("trial", static_cast<std::uint64_t>(trial));
    TrialRow row;
    row.trial = trial;
    switch (kind) {
        case ExperimentKind::Sorkin: {
            const SignallingReport r = run_sorkin(build_sorkin(cfg, rng));
            row.delta = r.delta;
            row.operator_delta = r.operator_delta;
            row.pass = r.pass;
            break;
        }
        case ExperimentKind::Adversary: {
            AdversaryConfig ac;
            ac.base = build_sorkin(cfg, rng);
            if (const json* th = opt_field(cfg.raw, "threshold"))
                ac.threshold = get_double(*th, "/threshold");
            ac.trials = cfg.trials;
            const SignallingReport r = run_adversary(ac);
            row.delta = r.delta;
            row.operator_delta = r.operator_delta;
            row.pass = r.pass;
            row.note = r.note;
            break;
        }
        case ExperimentKind::Theorem2: {
            Theorem2Config tc;
            tc.system = parse_system(field(cfg.raw, "system", ""), rng, "/system");
            tc.observers = build_observers(cfg, tc.system, rng);
            tc.target = static_cast<std::size_t>(
                get_int(field(cfg.raw, "target", ""), "/target"));
            tc.spacelike = static_cast<std::size_t>(
                get_int(field(cfg.raw, "spacelike", ""), "/spacelike"));
            if (const json* ad = opt_field(cfg.raw, "allow_disconnected"))
                tc.allow_disconnected = ad->get<bool>();
            tc.omega = parse_omega(cfg.raw, tc.system, rng);
            tc.tol = cfg.tolerance;
            tc.seed = cfg.seed;
            const SignallingReport r = run_theorem2(tc);
            row.delta = r.delta;
            row.pass = r.pass;
            break;
        }
        case ExperimentKind::Factorisation: {
            const SystemSpec spec = parse_system(field(cfg.raw, "system", ""), rng, "/system");
            const std::vector<ObserverSpec> observers = build_observers(cfg, spec, rng);
            CausalOrder order;
            if (const json* oj = opt_field(cfg.raw, "order")) {
                for (std::size_t i = 0; i < oj->size(); ++i)
                    order.order.push_back(static_cast<std::size_t>(
                        get_int((*oj)[i], "/order/" + std::to_string(i))));
            } else {
                const auto orders =
                    enumerate_causal_orders(spec.lattice, coupling_zones(observers));
                if (orders.empty()) throw NotOrderable("observers are not causally orderable");
                order = orders.front();
            }
            const FactorisationReport r =
                check_causal_factorisation(spec, observers, order, cfg.tolerance);
            row.delta = r.max_deviation;
            row.pass = r.pass;
            break;
        }
        case ExperimentKind::Spacelike: {
            const SystemSpec spec = parse_system(field(cfg.raw, "system", ""), rng, "/system");
            ObserverSpec a = parse_observer(field(cfg.raw, "alice", ""), spec, rng, "/alice");
            ObserverSpec b = parse_observer(field(cfg.raw, "bob", ""), spec, rng, "/bob");
            const Matrix effect = parse_observable(field(cfg.raw, "effect", ""), a.probe.dim,
                                                   rng, "/effect");
            const SpectralCheck ec = check_effect(effect, 1e-9);
            if (!ec.ok) throw PhysicsValidationError("/effect: " + ec.reason);
            const DensityState omega = parse_omega(cfg.raw, spec, rng);
            const SpacelikeReport r =
                check_spacelike_commutation(spec, omega, a, effect, b, cfg.tolerance);
            row.delta = r.correlation_gap;
            row.operator_delta = r.max_commutation_dev;
            row.pass = r.pass;
            break;
        }
        case ExperimentKind::Campaign:
            throw ConfigError("campaign cannot nest");
    }
    return row;
}

} // namespace

std::string experiment_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Sorkin: return "sorkin";
        case ExperimentKind::Theorem2: return "theorem2";
        case ExperimentKind::Adversary: return "adversary";
        case ExperimentKind::Factorisation: return "factorisation";
        case ExperimentKind::Spacelike: return "spacelike";
        case ExperimentKind::Campaign: return "campaign";
    }
    return "unknown";
}

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (const unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

std::string dump_report(const nlohmann::json& report) { return report.dump(2) + "\n"; }

ExperimentConfig parse_config_text(const std::string& text) {
    json raw;
    try {
        raw = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    ExperimentConfig cfg;
    cfg.raw = raw;
    cfg.digest = fnv1a_hex(raw.dump());
    cfg.version = get_int(field(raw, "version", ""), "/version");
    if (cfg.version != 1) schema_fail("/version", "unsupported config version");
    const std::string name = get_string(field(raw, "experiment", ""), "/experiment");
    if (name == "sorkin") cfg.kind = ExperimentKind::Sorkin;
    else if (name == "theorem2") cfg.kind = ExperimentKind::Theorem2;
    else if (name == "adversary") cfg.kind = ExperimentKind::Adversary;
    else if (name == "factorisation") cfg.kind = ExperimentKind::Factorisation;
    else if (name == "spacelike") cfg.kind = ExperimentKind::Spacelike;
    else if (name == "campaign") cfg.kind = ExperimentKind::Campaign;
    else schema_fail("/experiment", "unknown experiment '" + name + "'");
    if (const json* s = opt_field(raw, "seed")) {
        if (!s->is_number_unsigned()) schema_fail("/seed", "expected an unsigned integer");
        cfg.seed = s->get<std::uint64_t>();
    }
    if (const json* t = opt_field(raw, "tolerance")) cfg.tolerance = get_double(*t, "/tolerance");
    if (cfg.tolerance <= 0) schema_fail("/tolerance", "tolerance must be positive");
    if (const json* t = opt_field(raw, "trials")) cfg.trials = get_int(*t, "/trials");
    if (cfg.trials < 1) schema_fail("/trials", "trials must be positive");
    if (cfg.kind == ExperimentKind::Campaign) {
        const std::string base =
            get_string(field(raw, "base_experiment", ""), "/base_experiment");
        if (base != "sorkin" && base != "theorem2" && base != "factorisation" &&
            base != "spacelike")
            schema_fail("/base_experiment", "campaign base must be a non-campaign experiment");
    }
    // deep-validate the rest of the document by materializing trial 0
    {
        ExperimentConfig probe = cfg;
        ExperimentKind kind = cfg.kind;
        if (kind == ExperimentKind::Campaign) {
            const std::string base = raw["base_experiment"].get<std::string>();
            kind = base == "sorkin"          ? ExperimentKind::Sorkin
                   : base == "theorem2"      ? ExperimentKind::Theorem2
                   : base == "factorisation" ? ExperimentKind::Factorisation
                                             : ExperimentKind::Spacelike;
        }
        Rng rng = Rng(cfg.seed).stream("trial", 0);
        if (kind == ExperimentKind::Sorkin || kind == ExperimentKind::Adversary ||
            kind == ExperimentKind::Spacelike) {
            const SystemSpec spec = parse_system(field(raw, "system", ""), rng, "/system");
            const ObserverSpec alice =
                parse_observer(field(raw, "alice", ""), spec, rng, "/alice");
            parse_observer(field(raw, "bob", ""), spec, rng, "/bob");
            parse_omega(raw, spec, rng);
            if (kind != ExperimentKind::Spacelike) {
                const json& ch = field(raw, "charlie", "");
                const Region region =
                    parse_region(field(ch, "region", "/charlie"), "/charlie/region");
                parse_charlie_observable(field(ch, "observable", "/charlie"), spec, region,
                                         rng, "/charlie/observable");
            } else {
                parse_observable(field(raw, "effect", ""), alice.probe.dim, rng, "/effect");
            }
        } else {
            const SystemSpec spec = parse_system(field(raw, "system", ""), rng, "/system");
            build_observers(probe, spec, rng);
            parse_omega(raw, spec, rng);
        }
    }
    return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

RunResult run_experiment(const ExperimentConfig& config) {
    ExperimentKind kind = config.kind;
    if (kind == ExperimentKind::Campaign) {
        const std::string base = config.raw["base_experiment"].get<std::string>();
        kind = base == "sorkin"          ? ExperimentKind::Sorkin
               : base == "theorem2"      ? ExperimentKind::Theorem2
               : base == "factorisation" ? ExperimentKind::Factorisation
                                         : ExperimentKind::Spacelike;
    }

    std::vector<TrialRow> rows;
    for (int t = 0; t < config.trials; ++t) rows.push_back(run_trial(config, kind, t));

    json checks = json::array();
    double max_delta = 0.0, max_op = 0.0;
    bool pass = true;
    std::ostringstream csv;
    csv << "trial,delta,operator_delta,pass\n";
    for (const TrialRow& r : rows) {
        json c;
        c["trial"] = r.trial;
        c["delta"] = r.delta;
        c["operator_delta"] = r.operator_delta;
        c["pass"] = r.pass;
        if (!r.note.empty()) c["note"] = r.note;
        checks.push_back(std::move(c));
        max_delta = std::max(max_delta, r.delta);
        max_op = std::max(max_op, r.operator_delta);
        pass = pass && r.pass;
        csv << r.trial << ',' << r.delta << ',' << r.operator_delta << ','
            << (r.pass ? 1 : 0) << '\n';
    }

    RunResult result;
    result.report["tool_version"] = kToolVersion;
    result.report["config_digest"] = config.digest;
    result.report["experiment"] = experiment_name(config.kind);
    result.report["seed"] = config.seed;
    result.report["tolerance"] = config.tolerance;
    result.report["trials"] = config.trials;
    result.report["checks"] = std::move(checks);
    result.report["max_delta"] = max_delta;
    result.report["max_operator_delta"] = max_op;
    result.report["pass"] = pass;
    if (config.kind == ExperimentKind::Campaign) result.csv = csv.str();
    result.exit_code = pass ? 0 : 1;
    return result;
}

} // namespace fv
