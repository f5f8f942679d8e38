#include "tumorpf/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>

#include "tumorpf/error.hpp"
#include "tumorpf/expr.hpp"
#include "tumorpf/field_io.hpp"

namespace tpf {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Field sources
// ---------------------------------------------------------------------------

FieldSource FieldSource::constant(double v) {
  FieldSource s;
  s.value = v;
  return s;
}

FieldSource FieldSource::expression(std::string source) {
  Expression::parse(source);
  FieldSource s;
  s.kind = Kind::Expression;
  s.text = std::move(source);
  return s;
}

FieldSource FieldSource::file(std::string path, std::string column) {
  FieldSource s;
  s.kind = Kind::File;
  s.text = std::move(path);
  s.column = std::move(column);
  return s;
}

namespace {

// Expression fields evaluated node by node; x and y are node coordinates.
template <class Fn>
Field tabulate(const Grid& grid, Fn&& fn) {
  Field f(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.coordinate(i, 0);
    const double y = grid.dim() == 2 ? grid.coordinate(i, 1) : 0.0;
    f[static_cast<Eigen::Index>(i)] = fn(x, y);
  }
  return f;
}

// Library errors raised while building a block are reported against its key.
template <class Fn>
auto keyed(const std::string& key, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Config && std::string(e.what()).find(key) != std::string::npos) throw;
    fail(ErrorCode::Config, key + ": " + e.what());
  }
}

}  // namespace

Field FieldSource::sample(const Grid& grid, double t, const std::string& key) const {
  return keyed(key, [&] {
    switch (kind) {
      case Kind::Constant:
        return grid.constant(value);
      case Kind::Expression: {
        const Expression e = Expression::parse(text);
        return tabulate(grid, [&](double x, double y) { return e(x, y, t); });
      }
      case Kind::File:
        return field_from_table(read_csv(text), grid, column, text);
    }
    return grid.zeros();
  });
}

FieldSeries FieldSource::sample(const Grid& grid, const std::vector<double>& times,
                                const std::string& key) const {
  return keyed(key, [&] {
    const int levels = static_cast<int>(times.size());
    switch (kind) {
      case Kind::Constant:
        return FieldSeries(times.size(), grid.constant(value));
      case Kind::Expression: {
        const Expression e = Expression::parse(text);
        FieldSeries s;
        s.reserve(times.size());
        for (double t : times) s.push_back(tabulate(grid, [&](double x, double y) { return e(x, y, t); }));
        return s;
      }
      case Kind::File:
        return series_from_table(read_csv(text), grid, levels, column, text);
    }
    return FieldSeries();
  });
}

// ---------------------------------------------------------------------------
// Strict JSON reader
// ---------------------------------------------------------------------------

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

class Block {
 public:
  Block(const json& j, std::string path) : path_(std::move(path)) {
    if (j.is_null()) return;
    require(j.is_object(), ErrorCode::Config,
            (path_.empty() ? std::string("configuration") : path_) + " must be an object");
    j_ = &j;
  }

  ~Block() noexcept(false) {
    if (!j_ || std::uncaught_exceptions()) return;
    for (const auto& [k, v] : j_->items())
      require(used_.count(k), ErrorCode::Config, "unknown key '" + join(path_, k) + "'");
  }

  std::string key(const std::string& k) const { return join(path_, k); }
  const std::string& path() const noexcept { return path_; }

  const json* find(const std::string& k) {
    used_.insert(k);
    if (!j_) return nullptr;
    const auto it = j_->find(k);
    return it == j_->end() || it->is_null() ? nullptr : &*it;
  }

  Block child(const std::string& k) {
    const json* v = find(k);
    static const json null;
    return Block(v ? *v : null, key(k));
  }

  double number(const std::string& k, double dflt) {
    const json* v = find(k);
    if (!v) return dflt;
    require(v->is_number(), ErrorCode::Config, "'" + key(k) + "' must be a number");
    const double d = v->get<double>();
    require(std::isfinite(d), ErrorCode::Config, "'" + key(k) + "' must be finite");
    return d;
  }

  long long integer(const std::string& k, long long dflt) {
    const json* v = find(k);
    if (!v) return dflt;
    require(v->is_number_integer(), ErrorCode::Config, "'" + key(k) + "' must be an integer");
    return v->get<long long>();
  }

  std::uint64_t unsigned_integer(const std::string& k, std::uint64_t dflt) {
    const json* v = find(k);
    if (!v) return dflt;
    require(v->is_number_unsigned(), ErrorCode::Config,
            "'" + key(k) + "' must be a nonnegative integer");
    return v->get<std::uint64_t>();
  }

  std::string string(const std::string& k, const std::string& dflt) {
    const json* v = find(k);
    if (!v) return dflt;
    require(v->is_string(), ErrorCode::Config, "'" + key(k) + "' must be a string");
    return v->get<std::string>();
  }

  std::vector<double> numbers(const std::string& k, std::vector<double> dflt) {
    const json* v = find(k);
    if (!v) return dflt;
    require(v->is_array(), ErrorCode::Config, "'" + key(k) + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : *v) {
      require(e.is_number() && std::isfinite(e.get<double>()), ErrorCode::Config,
              "'" + key(k) + "' must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<int> integers(const std::string& k, std::vector<int> dflt) {
    const json* v = find(k);
    if (!v) return dflt;
    require(v->is_array(), ErrorCode::Config, "'" + key(k) + "' must be an array of integers");
    std::vector<int> out;
    for (const auto& e : *v) {
      require(e.is_number_integer(), ErrorCode::Config,
              "'" + key(k) + "' must be an array of integers");
      out.push_back(e.get<int>());
    }
    return out;
  }

  FieldSource field(const std::string& k, const FieldSource& dflt, const fs::path& base) {
    const json* v = find(k);
    if (!v) return dflt;
    const std::string name = key(k);
    if (v->is_number()) {
      require(std::isfinite(v->get<double>()), ErrorCode::Config, "'" + name + "' must be finite");
      return FieldSource::constant(v->get<double>());
    }
    if (v->is_string()) return keyed(name, [&] { return FieldSource::expression(v->get<std::string>()); });
    require(v->is_object(), ErrorCode::Config,
            "'" + name + "' must be a number, an expression string or {\"file\": ...}");
    Block b(*v, name);
    const std::string file = b.string("file", "");
    require(!file.empty(), ErrorCode::Config, "'" + name + ".file' is required");
    const std::string column = b.string("column", "");
    fs::path p(file);
    if (p.is_relative()) p = base / p;
    p = fs::absolute(p).lexically_normal();
    require(fs::is_regular_file(p), ErrorCode::Config,
            "'" + name + ".file': no such file " + p.string());
    return FieldSource::file(p.string(), column);
  }

  void positive(const std::string& k, double v) const {
    require(v > 0.0, ErrorCode::Config, "'" + key(k) + "' must be positive");
  }
  void nonnegative(const std::string& k, double v) const {
    require(v >= 0.0, ErrorCode::Config, "'" + key(k) + "' must be nonnegative");
  }

 private:
  const json* j_ = nullptr;
  std::string path_;
  std::set<std::string> used_;
};

struct ShapeParams {
  const char* id;
  std::vector<const char*> names;
};

const ShapeParams kShapeParams[] = {
    {"constant", {"value"}},
    {"ramp", {"lo", "hi", "low_value", "high_value"}},
    {"bump", {"amplitude", "center", "width"}},
    {"table", {}},
};

const ShapeParams& shape_params(const std::string& id, const std::string& key) {
  for (const auto& s : kShapeParams)
    if (id == s.id) return s;
  fail(ErrorCode::Config, "'" + key + "': unknown shape '" + id + "'");
}

Shape read_shape(Block b, const Shape& dflt) {
  const std::string id = b.string("shape", dflt.id());
  const ShapeParams& sp = shape_params(id, b.key("shape"));
  std::map<std::string, double> params;
  for (const char* n : sp.names)
    if (b.find(n)) params[n] = b.number(n, 0.0);
  if (id == dflt.id() && params.empty() && id != "table")
    for (std::size_t i = 0; i < sp.names.size(); ++i) params[sp.names[i]] = dflt.params()[i];
  std::vector<double> knots, values;
  if (id == "table") {
    knots = b.numbers("knots", dflt.knots());
    values = b.numbers("values", dflt.values());
  }
  return keyed(b.path(), [&] { return Shape::from_id(id, params, knots, values); });
}

ordered_json shape_json(const Shape& s) {
  ordered_json j;
  j["shape"] = s.id();
  if (s.kind() == ShapeKind::Table) {
    j["knots"] = s.knots();
    j["values"] = s.values();
    return j;
  }
  const ShapeParams& sp = shape_params(s.id(), "shape");
  for (std::size_t i = 0; i < sp.names.size(); ++i) j[sp.names[i]] = s.params()[i];
  return j;
}

ordered_json field_json(const FieldSource& f) {
  switch (f.kind) {
    case FieldSource::Kind::Constant: return f.value;
    case FieldSource::Kind::Expression: return f.text;
    case FieldSource::Kind::File: {
      ordered_json j;
      j["file"] = f.text;
      if (!f.column.empty()) j["column"] = f.column;
      return j;
    }
  }
  return nullptr;
}

}  // namespace

// ---------------------------------------------------------------------------
// Parse / emit
// ---------------------------------------------------------------------------

RunConfig parse_config(const json& j, const std::string& base_dir) {
  const fs::path base(base_dir);
  RunConfig c;
  Block root(j, "");

  {
    Block b = root.child("grid");
    c.shape = b.integers("shape", c.shape);
    c.dim = static_cast<int>(b.integer("dim", static_cast<long long>(c.shape.size())));
    c.lengths = b.numbers("lengths", std::vector<double>(c.shape.size(), c.lengths.front()));
    require(c.dim == 1 || c.dim == 2, ErrorCode::Config, "'grid.dim' must be 1 or 2");
    require(static_cast<int>(c.shape.size()) == c.dim, ErrorCode::Config,
            "'grid.shape' must have grid.dim entries");
    require(static_cast<int>(c.lengths.size()) == c.dim, ErrorCode::Config,
            "'grid.lengths' must have grid.dim entries");
    for (int n : c.shape) require(n >= 3, ErrorCode::Config, "'grid.shape' entries must be >= 3");
    for (double l : c.lengths) require(l > 0.0, ErrorCode::Config, "'grid.lengths' entries must be positive");
  }
  {
    Block b = root.child("time");
    c.T = b.number("T", c.T);
    c.steps = static_cast<int>(b.integer("steps", c.steps));
    b.positive("T", c.T);
    require(c.steps >= 1, ErrorCode::Config, "'time.steps' must be >= 1");
  }
  {
    Block b = root.child("model");
    c.model.alpha = b.number("alpha", c.model.alpha);
    c.model.beta = b.number("beta", c.model.beta);
    c.model.chi = b.number("chi", c.model.chi);
    b.positive("alpha", c.model.alpha);
    b.positive("beta", c.model.beta);
    b.positive("chi", c.model.chi);
  }
  {
    Block b = root.child("potential");
    const std::string kind = b.string("kind", to_string(c.potential.kind));
    c.potential.kind = keyed("potential.kind", [&] { return potential_kind_from_string(kind); });
    c.potential.k1 = b.number("k1", c.potential.k1);
    c.potential.k2 = b.number("k2", c.potential.k2);
    c.potential.coefficients = b.numbers("coefficients", c.potential.coefficients);
    keyed("potential", [&] { c.potential.validate(); });
  }
  {
    Block b = root.child("nonlinearity");
    c.nonlin.P = read_shape(b.child("P"), c.nonlin.P);
    c.nonlin.h = read_shape(b.child("h"), c.nonlin.h);
  }
  {
    Block b = root.child("initial");
    c.mu0 = b.field("mu", c.mu0, base);
    c.phi0 = b.field("phi", c.phi0, base);
    c.sigma0 = b.field("sigma", c.sigma0, base);
  }
  {
    Block b = root.child("cost");
    c.b0 = b.number("b0", c.b0);
    c.b1 = b.number("b1", c.b1);
    c.b2 = b.number("b2", c.b2);
    b.positive("b0", c.b0);
    b.nonnegative("b1", c.b1);
    b.nonnegative("b2", c.b2);
    c.target_Q = b.field("target_Q", c.target_Q, base);
    c.target_Omega = b.field("target_Omega", c.target_Omega, base);
  }
  {
    Block b = root.child("control");
    Block init = b.child("initial");
    c.u1_initial = init.field("u1", c.u1_initial, base);
    c.u2_initial = init.field("u2", c.u2_initial, base);
    Block bounds = b.child("bounds");
    Block b1 = bounds.child("u1");
    c.lower1 = b1.field("lower", c.lower1, base);
    c.upper1 = b1.field("upper", c.upper1, base);
    Block b2 = bounds.child("u2");
    c.lower2 = b2.field("lower", c.lower2, base);
    c.upper2 = b2.field("upper", c.upper2, base);
  }
  {
    Block b = root.child("solver");
    SolverOptions& s = c.solver;
    s.nonlinear_tol = b.number("nonlinear_tol", s.nonlinear_tol);
    s.max_newton = static_cast<int>(b.integer("max_newton", s.max_newton));
    s.max_backtracks = static_cast<int>(b.integer("max_backtracks", s.max_backtracks));
    s.max_retries = static_cast<int>(b.integer("max_retries", s.max_retries));
    s.sep_margin = b.number("sep_margin", s.sep_margin);
    s.yosida_eps = b.number("yosida_eps", s.yosida_eps);
    s.stages = static_cast<int>(b.integer("stages", s.stages));
    s.energy_blowup_factor = b.number("energy_blowup_factor", s.energy_blowup_factor);
    b.positive("nonlinear_tol", s.nonlinear_tol);
    require(s.max_newton >= 1, ErrorCode::Config, "'solver.max_newton' must be >= 1");
    require(s.max_backtracks >= 0, ErrorCode::Config, "'solver.max_backtracks' must be >= 0");
    require(s.max_retries >= 0, ErrorCode::Config, "'solver.max_retries' must be >= 0");
    b.nonnegative("sep_margin", s.sep_margin);
    b.nonnegative("yosida_eps", s.yosida_eps);
    require(s.stages >= 1 && s.stages <= 3, ErrorCode::Config, "'solver.stages' must be 1, 2 or 3");
    b.positive("energy_blowup_factor", s.energy_blowup_factor);
    require(c.potential.kind != PotentialKind::Obstacle || s.yosida_eps > 0.0, ErrorCode::Config,
            "'solver.yosida_eps' must be positive for the obstacle potential");
  }
  {
    Block b = root.child("optimizer");
    PgdOptions& o = c.optimizer;
    o.tol = b.number("tol", o.tol);
    o.max_iter = static_cast<int>(b.integer("max_iter", o.max_iter));
    o.armijo_c = b.number("armijo_c", o.armijo_c);
    o.backtrack = b.number("backtrack", o.backtrack);
    o.max_backtracks = static_cast<int>(b.integer("max_backtracks", o.max_backtracks));
    o.initial_step = b.number("initial_step", o.initial_step);
    o.step_min = b.number("step_min", o.step_min);
    o.step_max = b.number("step_max", o.step_max);
    b.positive("tol", o.tol);
    require(o.max_iter >= 0, ErrorCode::Config, "'optimizer.max_iter' must be >= 0");
    require(o.armijo_c > 0.0 && o.armijo_c < 1.0, ErrorCode::Config,
            "'optimizer.armijo_c' must lie in (0, 1)");
    require(o.backtrack > 0.0 && o.backtrack < 1.0, ErrorCode::Config,
            "'optimizer.backtrack' must lie in (0, 1)");
    require(o.max_backtracks >= 1, ErrorCode::Config, "'optimizer.max_backtracks' must be >= 1");
    b.positive("initial_step", o.initial_step);
    b.positive("step_min", o.step_min);
    require(o.step_max >= o.step_min, ErrorCode::Config,
            "'optimizer.step_max' must be >= optimizer.step_min");
  }
  {
    Block b = root.child("ssc");
    SscOptions& s = c.ssc;
    s.tau = b.number("tau", s.tau);
    s.bound_tol = b.number("bound_tol", s.bound_tol);
    s.n_samples = static_cast<int>(b.integer("n_samples", s.n_samples));
    s.seed = b.unsigned_integer("seed", s.seed);
    s.zero_tol = b.number("zero_tol", s.zero_tol);
    b.nonnegative("tau", s.tau);
    b.nonnegative("bound_tol", s.bound_tol);
    require(s.n_samples >= 1, ErrorCode::Config, "'ssc.n_samples' must be >= 1");
    b.positive("zero_tol", s.zero_tol);
  }
  {
    Block b = root.child("verify");
    VerifyOptions& v = c.verify;
    v.gradient_dirs = static_cast<int>(b.integer("gradient_dirs", v.gradient_dirs));
    v.stability_pairs = static_cast<int>(b.integer("stability_pairs", v.stability_pairs));
    v.yosida_eps = b.number("yosida_eps", v.yosida_eps);
    v.seed = b.unsigned_integer("seed", v.seed);
    require(v.gradient_dirs >= 1, ErrorCode::Config, "'verify.gradient_dirs' must be >= 1");
    require(v.stability_pairs >= 1, ErrorCode::Config, "'verify.stability_pairs' must be >= 1");
    b.positive("yosida_eps", v.yosida_eps);
  }
  {
    Block b = root.child("output");
    c.output.out_dir = b.string("out_dir", c.output.out_dir);
    require(!c.output.out_dir.empty(), ErrorCode::Config, "'output.out_dir' must not be empty");
    c.output.snapshot_times = b.numbers("snapshot_times", c.output.snapshot_times);
    for (double t : c.output.snapshot_times)
      require(t >= 0.0 && t <= c.T, ErrorCode::Config, "'output.snapshot_times' must lie in [0, time.T]");
  }
  return c;
}

ordered_json to_json(const RunConfig& c) {
  ordered_json j;
  j["grid"] = {{"dim", c.dim}, {"shape", c.shape}, {"lengths", c.lengths}};
  j["time"] = {{"T", c.T}, {"steps", c.steps}};
  j["model"] = {{"alpha", c.model.alpha}, {"beta", c.model.beta}, {"chi", c.model.chi}};
  j["potential"] = {{"kind", to_string(c.potential.kind)},
                    {"k1", c.potential.k1},
                    {"k2", c.potential.k2},
                    {"coefficients", c.potential.coefficients}};
  j["nonlinearity"] = {{"P", shape_json(c.nonlin.P)}, {"h", shape_json(c.nonlin.h)}};
  j["initial"] = {{"mu", field_json(c.mu0)}, {"phi", field_json(c.phi0)}, {"sigma", field_json(c.sigma0)}};
  j["cost"] = {{"b0", c.b0},
               {"b1", c.b1},
               {"b2", c.b2},
               {"target_Q", field_json(c.target_Q)},
               {"target_Omega", field_json(c.target_Omega)}};
  ordered_json ctl;
  ctl["initial"] = {{"u1", field_json(c.u1_initial)}, {"u2", field_json(c.u2_initial)}};
  ctl["bounds"]["u1"] = {{"lower", field_json(c.lower1)}, {"upper", field_json(c.upper1)}};
  ctl["bounds"]["u2"] = {{"lower", field_json(c.lower2)}, {"upper", field_json(c.upper2)}};
  j["control"] = ctl;
  const SolverOptions& s = c.solver;
  j["solver"] = {{"nonlinear_tol", s.nonlinear_tol},
                 {"max_newton", s.max_newton},
                 {"max_backtracks", s.max_backtracks},
                 {"max_retries", s.max_retries},
                 {"sep_margin", s.sep_margin},
                 {"yosida_eps", s.yosida_eps},
                 {"stages", s.stages},
                 {"energy_blowup_factor", s.energy_blowup_factor}};
  const PgdOptions& o = c.optimizer;
  j["optimizer"] = {{"tol", o.tol},
                    {"max_iter", o.max_iter},
                    {"armijo_c", o.armijo_c},
                    {"backtrack", o.backtrack},
                    {"max_backtracks", o.max_backtracks},
                    {"initial_step", o.initial_step},
                    {"step_min", o.step_min},
                    {"step_max", o.step_max}};
  j["ssc"] = {{"tau", c.ssc.tau},
              {"bound_tol", c.ssc.bound_tol},
              {"n_samples", c.ssc.n_samples},
              {"seed", c.ssc.seed},
              {"zero_tol", c.ssc.zero_tol}};
  j["verify"] = {{"gradient_dirs", c.verify.gradient_dirs},
                 {"stability_pairs", c.verify.stability_pairs},
                 {"yosida_eps", c.verify.yosida_eps},
                 {"seed", c.verify.seed}};
  j["output"] = {{"out_dir", c.output.out_dir}, {"snapshot_times", c.output.snapshot_times}};
  return j;
}

json read_config_json(const std::string& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), ErrorCode::Io, "cannot read config " + path);
  try {
    return json::parse(is, nullptr, true, true);  // comments allowed
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Config, path + ": " + e.what());
  }
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  require(eq != std::string::npos && eq > 0, ErrorCode::Config,
          "override '" + assignment + "' is not of the form key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  if (j.is_null()) j = json::object();
  json* node = &j;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    require(!part.empty(), ErrorCode::Config, "override key '" + key + "' is malformed");
    require(node->is_object(), ErrorCode::Config,
            "override '" + key + "': '" + key.substr(0, start ? start - 1 : 0) + "' is not a block");
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    json& next = (*node)[part];
    if (next.is_null()) next = json::object();
    node = &next;
    start = dot + 1;
  }
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  json j = read_config_json(path);
  for (const auto& o : overrides) apply_override(j, o);
  const fs::path dir = fs::path(path).parent_path();
  return parse_config(j, dir.empty() ? "." : dir.string());
}

// ---------------------------------------------------------------------------
// Problem construction
// ---------------------------------------------------------------------------

Instance build_instance(const RunConfig& c, int coarsen) {
  std::vector<int> shape = c.shape;
  int steps = c.steps;
  for (int k = 0; k < coarsen; ++k) {
    for (int& n : shape) {
      require(n % 2 == 1 && (n - 1) / 2 + 1 >= 3, ErrorCode::Config,
              "'grid.shape' must hold odd counts >= 5 to build a coarsened grid");
      n = (n - 1) / 2 + 1;
    }
    require(steps % 2 == 0, ErrorCode::Config, "'time.steps' must be even to build a coarsened grid");
    steps /= 2;
  }
  if (coarsen > 0) {
    for (const FieldSource* f : {&c.mu0, &c.phi0, &c.sigma0, &c.target_Q, &c.target_Omega, &c.u1_initial,
                                 &c.u2_initial, &c.lower1, &c.upper1, &c.lower2, &c.upper2})
      require(f->kind != FieldSource::Kind::File, ErrorCode::Config,
              "file-defined fields cannot be resampled on the coarsened grid (" + f->text + ")");
  }

  Grid grid = keyed("grid", [&] { return Grid::build(c.dim, shape, c.lengths); });
  TimeGrid time = keyed("time", [&] { return TimeGrid::make(c.T, steps); });
  Problem pb(grid, time);
  pb.params = c.model;
  pb.potential = c.potential;
  pb.nonlin = c.nonlin;
  pb.solver = c.solver;
  pb.init.mu0 = c.mu0.sample(grid, 0.0, "initial.mu");
  pb.init.phi0 = c.phi0.sample(grid, 0.0, "initial.phi");
  pb.init.sigma0 = c.sigma0.sample(grid, 0.0, "initial.sigma");

  std::vector<double> snaps(static_cast<std::size_t>(steps + 1)), mids(static_cast<std::size_t>(steps));
  for (int n = 0; n <= steps; ++n) snaps[n] = time.time(n);
  for (int n = 0; n < steps; ++n) mids[n] = 0.5 * (time.time(n) + time.time(n + 1));

  pb.cost.b0 = c.b0;
  pb.cost.b1 = c.b1;
  pb.cost.b2 = c.b2;
  pb.cost.target_Q = c.target_Q.sample(grid, snaps, "cost.target_Q");
  pb.cost.target_Omega = c.target_Omega.sample(grid, c.T, "cost.target_Omega");
  keyed("initial.phi", [&] { pb.init.check(grid, pb.potential); });
  pb.validate();

  BoxConstraints box;
  box.lower1 = c.lower1.sample(grid, mids, "control.bounds.u1.lower");
  box.upper1 = c.upper1.sample(grid, mids, "control.bounds.u1.upper");
  box.lower2 = c.lower2.sample(grid, mids, "control.bounds.u2.lower");
  box.upper2 = c.upper2.sample(grid, mids, "control.bounds.u2.upper");
  keyed("control.bounds", [&] { box.check(grid, time); });

  Control u;
  u.u1 = c.u1_initial.sample(grid, mids, "control.initial.u1");
  u.u2 = c.u2_initial.sample(grid, mids, "control.initial.u2");
  return Instance{std::move(pb), std::move(box), std::move(u)};
}

std::vector<int> snapshot_levels(const RunConfig& c) {
  std::vector<int> levels;
  if (c.output.snapshot_times.empty()) {
    for (int k = 0; k <= 10; ++k) levels.push_back(static_cast<int>(std::lround(k * c.steps / 10.0)));
  } else {
    for (double t : c.output.snapshot_times)
      levels.push_back(static_cast<int>(std::lround(t / c.T * c.steps)));
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  return levels;
}

}  // namespace tpf
