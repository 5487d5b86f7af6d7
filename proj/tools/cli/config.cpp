#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <vector>

#include "expression.hpp"

namespace chaplygin::cli {

using nlohmann::json;

namespace {

std::string child(const std::string& ptr, const std::string& key) { return ptr + "/" + key; }
std::string child(const std::string& ptr, std::size_t idx) {
  return ptr + "/" + std::to_string(idx);
}

void require_object(const json& j, const std::string& ptr) {
  if (!j.is_object()) throw ConfigError(ptr, "expected an object");
}

void check_keys(const json& j, const std::string& ptr, std::initializer_list<const char*> allowed) {
  require_object(j, ptr);
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) throw ConfigError(child(ptr, key), "unknown field");
  }
}

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const json& require(const json& obj, const std::string& ptr, const char* key) {
  const json* v = find(obj, key);
  if (!v) throw ConfigError(child(ptr, key), "missing required field");
  return *v;
}

double as_number(const json& j, const std::string& ptr) {
  if (!j.is_number()) throw ConfigError(ptr, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(ptr, "expected a finite number");
  return v;
}

double positive(const json& j, const std::string& ptr) {
  const double v = as_number(j, ptr);
  if (!(v > 0.0)) throw ConfigError(ptr, "must be positive");
  return v;
}

std::size_t count(const json& j, const std::string& ptr, std::size_t min_value) {
  if (!j.is_number_integer()) throw ConfigError(ptr, "expected an integer");
  const auto v = j.get<long long>();
  if (v < static_cast<long long>(min_value)) {
    throw ConfigError(ptr, "must be at least " + std::to_string(min_value));
  }
  return static_cast<std::size_t>(v);
}

std::string as_string(const json& j, const std::string& ptr) {
  if (!j.is_string()) throw ConfigError(ptr, "expected a string");
  return j.get<std::string>();
}

Vec as_vector(const json& j, const std::string& ptr, Index expected) {
  if (!j.is_array()) throw ConfigError(ptr, "expected an array of numbers");
  if (expected >= 0 && static_cast<Index>(j.size()) != expected) {
    throw ConfigError(ptr, "expected " + std::to_string(expected) + " entries, got " +
                               std::to_string(j.size()));
  }
  Vec v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = as_number(j[i], child(ptr, i));
  return v;
}

std::filesystem::path resolve(const std::filesystem::path& base, const json& j,
                              const std::string& ptr) {
  const std::string s = as_string(j, ptr);
  if (s.empty()) throw ConfigError(ptr, "path must not be empty");
  std::filesystem::path p(s);
  return p.is_absolute() ? p : base / p;
}

template <typename Fn>
ScalarMap compile_at(const std::string& ptr, Fn&& build) {
  try {
    return build();
  } catch (const ExpressionError& e) {
    throw ConfigError(ptr, e.what());
  }
}

VariableTable gamma_variables(Index n) {
  VariableTable t;
  for (Index i = 0; i < n; ++i) t["g" + std::to_string(i + 1)] = i;
  for (Index i = 0; i + 1 < n; ++i) t["s" + std::to_string(i + 1)] = i;
  return t;
}

SystemDefinition build_particle(const json& params, const std::string& ptr) {
  check_keys(params, ptr, {"a", "potential"});
  ParticleParams pp;
  if (const json* a = find(params, "a")) pp.a = as_number(*a, child(ptr, "a"));
  if (const json* pot = find(params, "potential")) {
    const std::string pptr = child(ptr, "potential");
    if (pot->is_string()) {
      const std::string name = pot->get<std::string>();
      if (name == "zero") {
        pp.potential = ParticlePotential::kZero;
      } else if (name == "U_a") {
        pp.potential = ParticlePotential::kUa;
      } else {
        throw ConfigError(pptr, "expected \"zero\", \"U_a\" or {\"expression\": ...}");
      }
    } else {
      check_keys(*pot, pptr, {"expression"});
      const std::string eptr = child(pptr, "expression");
      const std::string src = as_string(require(*pot, pptr, "expression"), eptr);
      pp.potential = ParticlePotential::kCustom;
      pp.custom_potential = compile_at(eptr, [&] { return shape_expression("particle", 2, src); });
    }
  }
  try {
    return make_nonholonomic_particle(pp);
  } catch (const InvalidParams& e) {
    throw ConfigError(ptr, e.what());
  }
}

SystemDefinition build_disk(const json& params, const std::string& ptr) {
  check_keys(params, ptr, {"m", "I", "J", "R", "potential"});
  DiskParams dp;
  if (const json* v = find(params, "m")) dp.m = positive(*v, child(ptr, "m"));
  if (const json* v = find(params, "I")) dp.I = positive(*v, child(ptr, "I"));
  if (const json* v = find(params, "J")) dp.J = positive(*v, child(ptr, "J"));
  if (const json* v = find(params, "R")) dp.R = positive(*v, child(ptr, "R"));
  if (const json* pot = find(params, "potential")) {
    const std::string pptr = child(ptr, "potential");
    if (pot->is_string()) {
      if (pot->get<std::string>() != "zero") {
        throw ConfigError(pptr, "expected \"zero\" or {\"expression\": ...}");
      }
    } else {
      check_keys(*pot, pptr, {"expression"});
      const std::string eptr = child(pptr, "expression");
      const std::string src = as_string(require(*pot, pptr, "expression"), eptr);
      dp.potential = compile_at(eptr, [&] { return shape_expression("disk", 2, src); });
    }
  }
  try {
    return make_vertical_disk(dp);
  } catch (const InvalidParams& e) {
    throw ConfigError(ptr, e.what());
  }
}

SystemDefinition build_veselova(const json& params, const std::string& ptr) {
  check_keys(params, ptr, {"n", "A", "delta", "realization", "potential"});
  VeselovaParams vp;
  if (const json* v = find(params, "n")) vp.n = static_cast<Index>(count(*v, child(ptr, "n"), 3));
  vp.A = as_vector(require(params, ptr, "A"), child(ptr, "A"), vp.n);
  for (Index i = 0; i < vp.n; ++i) {
    if (!(vp.A(i) > 0.0)) throw ConfigError(child(child(ptr, "A"), static_cast<std::size_t>(i)), "must be positive");
  }
  if (const json* v = find(params, "delta")) vp.delta = as_number(*v, child(ptr, "delta"));
  if (const json* v = find(params, "realization")) {
    const std::string name = as_string(*v, child(ptr, "realization"));
    if (name == "chart") {
      vp.realization = VeselovaRealization::kChart;
    } else if (name == "group") {
      vp.realization = VeselovaRealization::kGroup;
    } else {
      throw ConfigError(child(ptr, "realization"), "expected \"chart\" or \"group\"");
    }
  }
  if (const json* pot = find(params, "potential")) {
    const std::string pptr = child(ptr, "potential");
    if (pot->is_string()) {
      if (pot->get<std::string>() != "zero") {
        throw ConfigError(pptr, "expected \"zero\", {\"axial\": k} or {\"expression\": ...}");
      }
    } else {
      require_object(*pot, pptr);
      if (pot->size() != 1) throw ConfigError(pptr, "expected exactly one of axial, expression");
      check_keys(*pot, pptr, {"axial", "expression"});
      if (const json* k = find(*pot, "axial")) {
        vp.potential = veselova::axial_potential(as_number(*k, child(pptr, "axial")));
      } else {
        const std::string eptr = child(pptr, "expression");
        const std::string src = as_string(*find(*pot, "expression"), eptr);
        vp.potential = compile_at(eptr, [&] { return compile_expression(src, gamma_variables(vp.n)); });
      }
    }
  }
  try {
    return make_veselova(vp);
  } catch (const InvalidParams& e) {
    throw ConfigError(ptr, e.what());
  }
}

SampleGrid parse_grid(const json& j, const std::string& ptr, Index r) {
  auto axis = [](const json& a, const std::string& aptr) {
    check_keys(a, aptr, {"lo", "hi", "points"});
    GridAxis ax;
    ax.lo = as_number(require(a, aptr, "lo"), child(aptr, "lo"));
    ax.hi = as_number(require(a, aptr, "hi"), child(aptr, "hi"));
    ax.points = static_cast<Index>(count(require(a, aptr, "points"), child(aptr, "points"), 3));
    if (!(ax.lo < ax.hi)) throw ConfigError(child(aptr, "hi"), "must exceed lo");
    return ax;
  };
  SampleGrid g;
  if (j.is_array()) {
    if (static_cast<Index>(j.size()) != r) {
      throw ConfigError(ptr, "expected " + std::to_string(r) + " axes, got " + std::to_string(j.size()));
    }
    for (std::size_t i = 0; i < j.size(); ++i) g.axes.push_back(axis(j[i], child(ptr, i)));
  } else {
    g.axes.assign(static_cast<std::size_t>(r), axis(j, ptr));
  }
  return g;
}

}  // namespace

ScalarMap shape_expression(const std::string& system_name, Index r, const std::string& source) {
  if (system_name == "veselova") {
    ScalarMap f = compile_expression(source, gamma_variables(r + 1));
    return [f](const Vec& s) { return f(veselova::gamma_from_shape(s)); };
  }
  VariableTable vars = shape_variables(r);
  if (system_name == "particle") {
    vars["x"] = 0;
    vars["y"] = 1;
  } else if (system_name == "disk") {
    vars["phi"] = 0;
    vars["theta"] = 1;
  }
  return compile_expression(source, vars);
}

RunConfig parse_config(const json& doc, const std::filesystem::path& base_dir, Command cmd) {
  check_keys(doc, "",
             {"system", "initial_state", "integrator", "diagnostics", "hamiltonise", "output"});
  RunConfig cfg;

  const bool needs_system = cmd != Command::kEmitPlot;
  Index r = 0;
  if (const json* sys = find(doc, "system")) {
    check_keys(*sys, "/system", {"name", "params"});
    cfg.system_name = as_string(require(*sys, "/system", "name"), "/system/name");
    static const json kEmpty = json::object();
    const json* params = find(*sys, "params");
    const json& p = params ? *params : kEmpty;
    if (cfg.system_name == "particle") {
      cfg.system = build_particle(p, "/system/params");
    } else if (cfg.system_name == "disk") {
      cfg.system = build_disk(p, "/system/params");
    } else if (cfg.system_name == "veselova") {
      cfg.system = build_veselova(p, "/system/params");
    } else {
      throw ConfigError("/system/name", "unknown system '" + cfg.system_name +
                                            "' (expected particle, disk or veselova)");
    }
    r = cfg.system->shape_dim;
  } else if (needs_system) {
    throw ConfigError("/system", "missing required field");
  }

  if (const json* st = find(doc, "initial_state")) {
    check_keys(*st, "/initial_state", {"s", "p"});
    if (r > 0) {
      cfg.initial_state = ReducedState{
          as_vector(require(*st, "/initial_state", "s"), "/initial_state/s", r),
          as_vector(require(*st, "/initial_state", "p"), "/initial_state/p", r)};
    }
  } else if (cmd == Command::kSimulate || cmd == Command::kHamiltonise) {
    throw ConfigError("/initial_state", "missing required field");
  }

  if (const json* in = find(doc, "integrator")) {
    check_keys(*in, "/integrator", {"method", "dt", "tol", "t_end", "sample_stride"});
    if (const json* m = find(*in, "method")) {
      const std::string name = as_string(*m, "/integrator/method");
      if (name == "rk4") {
        cfg.integrator.method = Method::kRk4;
      } else if (name == "rk45") {
        cfg.integrator.method = Method::kRk45;
      } else {
        throw ConfigError("/integrator/method", "expected \"rk4\" or \"rk45\"");
      }
    }
    if (const json* v = find(*in, "dt")) cfg.integrator.dt = positive(*v, "/integrator/dt");
    if (const json* v = find(*in, "tol")) cfg.integrator.tol = positive(*v, "/integrator/tol");
    if (const json* v = find(*in, "t_end")) cfg.integrator.t_end = positive(*v, "/integrator/t_end");
    if (const json* v = find(*in, "sample_stride")) {
      cfg.integrator.sample_stride = count(*v, "/integrator/sample_stride", 1);
    }
  }

  if (const json* d = find(doc, "diagnostics")) {
    check_keys(*d, "/diagnostics", {"grid", "tol", "samples", "p_scale"});
    DiagnosticsSpec ds;
    if (r > 0) ds.grid = parse_grid(require(*d, "/diagnostics", "grid"), "/diagnostics/grid", r);
    if (const json* v = find(*d, "tol")) ds.tol = positive(*v, "/diagnostics/tol");
    if (const json* v = find(*d, "samples")) ds.samples = count(*v, "/diagnostics/samples", 1);
    if (const json* v = find(*d, "p_scale")) ds.p_scale = positive(*v, "/diagnostics/p_scale");
    cfg.diagnostics = std::move(ds);
  } else if (cmd == Command::kDiagnose) {
    throw ConfigError("/diagnostics", "missing required field");
  }

  if (const json* h = find(doc, "hamiltonise")) {
    check_keys(*h, "/hamiltonise",
               {"enabled", "phi", "dtau", "t_end", "tau_end", "reference_tol", "sample_stride"});
    auto& hs = cfg.hamiltonise;
    if (const json* v = find(*h, "enabled")) {
      if (!v->is_boolean()) throw ConfigError("/hamiltonise/enabled", "expected a boolean");
      hs.enabled = v->get<bool>();
    }
    if (const json* phi = find(*h, "phi")) {
      check_keys(*phi, "/hamiltonise/phi", {"source", "expression"});
      const std::string src = as_string(require(*phi, "/hamiltonise/phi", "source"),
                                        "/hamiltonise/phi/source");
      if (src == "auto") {
        hs.source = PhiSource::kAuto;
      } else if (src == "builtin") {
        hs.source = PhiSource::kBuiltin;
      } else if (src == "expression") {
        hs.source = PhiSource::kExpression;
        hs.expression = as_string(require(*phi, "/hamiltonise/phi", "expression"),
                                  "/hamiltonise/phi/expression");
        if (r > 0) {
          compile_at("/hamiltonise/phi/expression",
                     [&] { return shape_expression(cfg.system_name, r, hs.expression); });
        }
      } else {
        throw ConfigError("/hamiltonise/phi/source",
                          "expected \"auto\", \"builtin\" or \"expression\"");
      }
    }
    if (const json* v = find(*h, "dtau")) hs.dtau = positive(*v, "/hamiltonise/dtau");
    if (const json* v = find(*h, "t_end")) hs.t_end = positive(*v, "/hamiltonise/t_end");
    if (const json* v = find(*h, "tau_end")) hs.tau_end = positive(*v, "/hamiltonise/tau_end");
    if (const json* v = find(*h, "reference_tol")) {
      hs.reference_tol = positive(*v, "/hamiltonise/reference_tol");
    }
    if (const json* v = find(*h, "sample_stride")) {
      hs.sample_stride = count(*v, "/hamiltonise/sample_stride", 1);
    }
  }
  if (cmd == Command::kHamiltonise) {
    if (!cfg.hamiltonise.enabled) {
      throw ConfigError("/hamiltonise/enabled", "the hamiltonise command needs enabled = true");
    }
    if (cfg.hamiltonise.source == PhiSource::kAuto && !cfg.diagnostics) {
      throw ConfigError("/diagnostics", "phi source \"auto\" needs a diagnostics grid");
    }
  }

  const json* out = find(doc, "output");
  if (out) {
    check_keys(*out, "/output", {"trajectory", "report", "plot"});
    if (const json* v = find(*out, "trajectory")) cfg.output.trajectory = resolve(base_dir, *v, "/output/trajectory");
    if (const json* v = find(*out, "report")) cfg.output.report = resolve(base_dir, *v, "/output/report");
    if (const json* v = find(*out, "plot")) cfg.output.plot = resolve(base_dir, *v, "/output/plot");
  }
  const bool needs_trajectory = cmd == Command::kSimulate || cmd == Command::kHamiltonise ||
                                cmd == Command::kEmitPlot;
  if (needs_trajectory && !cfg.output.trajectory) {
    throw ConfigError("/output/trajectory", "missing required field");
  }
  if (cmd == Command::kDiagnose && !cfg.output.report) {
    throw ConfigError("/output/report", "missing required field");
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, Command cmd) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  RunConfig cfg = parse_config(doc, path.parent_path().empty() ? "." : path.parent_path(), cmd);
  cfg.config_path = path;
  return cfg;
}

}  // namespace chaplygin::cli
