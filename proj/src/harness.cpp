#include "dyadica/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>

#include "dyadica/error.hpp"
#include "dyadica/maximal.hpp"
#include "dyadica/operators.hpp"
#include "dyadica/policy.hpp"
#include "dyadica/sampling.hpp"
#include "dyadica/stopping.hpp"

namespace dyadica {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const std::vector<std::string> kChecks = {"space",     "dyadic",   "kernel",   "operators", "theorem_b",
                                          "weak_type", "stopping", "maximal",  "theorem_a"};

std::string hex64(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Json vec_json(const Vec& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(number_json(x));
  return out;
}

Json cube_json(const std::optional<TestCube>& c) {
  if (!c) return nullptr;
  return Json{{"system", c->system}, {"k", c->id.k}, {"alpha", c->id.alpha}, {"point", c->point}};
}

Json normalize_budget(const Json& j, const std::string& path) {
  const NormBudget d;
  return Json{{"starts", get_count_or(j, "starts", d.starts, path)},
              {"iterations", get_count_or(j, "iterations", d.iterations, path)},
              {"ascent_steps", get_count_or(j, "ascent_steps", d.ascent_steps, path)},
              {"refine", get_count_or(j, "refine", d.refine, path)}};
}

NormBudget budget_of(const Json& j) {
  return {j.at("starts").get<std::size_t>(), j.at("iterations").get<std::size_t>(),
          j.at("ascent_steps").get<std::size_t>(), j.at("refine").get<std::size_t>()};
}

Json normalize_measure(const Json& j, const std::string& path) {
  if (j.is_string() || j.is_array()) return j;
  if (j.is_object() && j.contains("random")) {
    const Json& r = j.at("random");
    const MeasureDraw d;
    const std::string rp = path + ".random";
    return Json{{"random",
                 {{"log_low", get_number_or(r, "log_low", d.log_low, rp)},
                  {"log_high", get_number_or(r, "log_high", d.log_high, rp)},
                  {"zero_fraction", get_number_or(r, "zero_fraction", d.zero_fraction, rp)}}}};
  }
  config_error(path, "expected a measure name, an array of masses or {\"random\": {...}}");
}

// Everything a scenario builds lazily; a failed stage is remembered and
// reported by every check that depends on it.
struct Context {
  Json cfg;
  std::uint64_t seed = 0;
  std::shared_ptr<const QuasiMetricSpace> space;
  std::map<std::string, PointMeasure> named;  // space measures plus the roles
  PointMeasure sigma, omega, mu;
  Exponents e;
  NormBudget budget;
  std::size_t trials = 100;
  bool strict = true;

  std::optional<AdjacentFamily> family;
  std::optional<Kernel> kernel;
  std::vector<KernelEstimateReport> estimates;
  std::vector<DyadicOperator> ops;
  std::map<std::string, std::string> failed;  // stage -> witness

  std::uint64_t sub(std::uint64_t salt) const { return splitmix64(seed ^ splitmix64(salt)); }
};

[[noreturn]] void dependency_failed(const std::string& stage, const std::string& witness) {
  raise(Errc::PropertyViolation, "dependency " + stage + " failed: " + witness);
}

template <class F>
void stage(Context& ctx, const std::string& name, F&& build) {
  if (auto it = ctx.failed.find(name); it != ctx.failed.end()) dependency_failed(name, it->second);
  try {
    build();
  } catch (const Error& err) {
    if (err.code() == Errc::ConfigError) throw;
    ctx.failed[name] = std::string(errc_name(err.code())) + ": " + err.witness();
    throw;
  }
}

const AdjacentFamily& need_family(Context& ctx) {
  if (!ctx.family)
    stage(ctx, "dyadic", [&] {
      const Json& d = ctx.cfg.at("dyadic");
      DyadicParams dp;
      dp.delta = d.at("delta").is_string() ? 1.0 / (96.0 * std::pow(ctx.space->a0(), 6)) : d.at("delta").get<double>();
      dp.x0 = d.at("x0").get<std::size_t>();
      dp.strict_mode = ctx.strict;
      if (d.contains("k_min")) dp.k_min = d.at("k_min").get<int>();
      if (d.contains("k_max")) dp.k_max = d.at("k_max").get<int>();
      std::optional<double> target;
      if (d.contains("target_C")) target = d.at("target_C").get<double>();
      ctx.family = build_adjacent_family(ctx.space, dp, target, d.at("systems").get<std::size_t>(), ctx.sub(1));
    });
  return *ctx.family;
}

const Kernel& need_kernel(Context& ctx) {
  if (!ctx.kernel) {
    if (!ctx.cfg.contains("kernel")) config_error("$.kernel", "required by the requested checks");
    ctx.kernel = parse_kernel(ctx.cfg.at("kernel"), *ctx.space, ctx.named);
  }
  return *ctx.kernel;
}

const std::vector<DyadicOperator>& need_ops(Context& ctx) {
  if (ctx.ops.empty()) {
    const AdjacentFamily& fam = need_family(ctx);
    const Kernel& K = need_kernel(ctx);
    stage(ctx, "kernel", [&] {
      if (!ctx.estimates.empty()) return;
      for (const auto& s : fam.systems) ctx.estimates.push_back(verify_kernel_estimates(*s, K, compute_phi(*s, K)));
    });
    stage(ctx, "operators", [&] {
      for (std::size_t t = 0; t < fam.L(); ++t) {
        const PhiTable phi = compute_phi(*fam.systems[t], K);
        ctx.ops.push_back(build_dyadic_operator(generalize(fam.systems[t], ctx.sigma, ctx.omega), K, phi, ctx.sigma,
                                                ctx.omega, ctx.estimates[t].C_K));
      }
    });
  }
  return ctx.ops;
}

std::vector<const DyadicOperator*> op_ptrs(const std::vector<DyadicOperator>& ops) {
  std::vector<const DyadicOperator*> out;
  for (const auto& o : ops) out.push_back(&o);
  return out;
}

double max_CK(const Context& ctx) {
  double c = 1.0;
  for (const auto& e : ctx.estimates) c = std::max(c, e.C_K);
  return c;
}

CheckResult check_space(Context& ctx) {
  CheckResult r;
  const double replay = quasi_triangle_constant(*ctx.space);
  const double a0 = ctx.space->a0();
  if (std::fabs(replay - a0) > policy::quasi_triangle_rel * a0)
    raise(Errc::PropertyViolation, "stored a0 " + std::to_string(a0) + " replays as " + std::to_string(replay));
  const DoublingEstimate de = estimate_geometric_doubling(*ctx.space);
  r.constant = a0;
  r.details = {{"a0", a0}, {"doubling_upper", de.a1_upper}, {"diameter", ctx.space->diameter()},
               {"min_distance", ctx.space->min_distance()}};
  return r;
}

CheckResult check_dyadic(Context& ctx) {
  CheckResult r;
  const AdjacentFamily& fam = need_family(ctx);
  for (std::size_t t = 0; t < fam.L(); ++t) {
    if (auto v = verify_system(*fam.systems[t]))
      raise(Errc::PropertyViolation, "system " + std::to_string(t) + " property " + v->which + ": " + v->witness);
    if (auto w = check_separation_clause(*fam.systems[t]))
      raise(Errc::PropertyViolation, "system " + std::to_string(t) + " separation: " + *w);
  }
  if (auto w = verify_certificate(fam)) raise(Errc::CoverageIncomplete, *w);
  const auto& s0 = *fam.systems.front();
  const double bound = default_adjacency_constant(ctx.space->a0(), s0.delta());
  if (fam.observed_C > bound)
    raise(Errc::PropertyViolation, "observed adjacency constant " + std::to_string(fam.observed_C) + " exceeds " +
                                       std::to_string(bound));
  std::size_t cubes = 0;
  for (const auto& s : fam.systems) cubes += s->cube_count();
  r.constant = fam.observed_C;
  r.details = {{"L", fam.L()},
               {"observed_C", fam.observed_C},
               {"bound_C", bound},
               {"certificate_entries", fam.certificate.size()},
               {"cubes", cubes},
               {"k_min", s0.k_min()},
               {"k_max", s0.k_max()}};
  return r;
}

CheckResult check_kernel(Context& ctx) {
  CheckResult r;
  need_ops(ctx);
  Json per = Json::array();
  bool vacuous = true;
  for (const auto& e : ctx.estimates) {
    vacuous = vacuous && e.vacuous;
    per.push_back({{"C_K", e.C_K},
                   {"observed_i", e.observed_i},
                   {"observed_ii", e.observed_ii},
                   {"cubes_checked_iii", e.cubes_checked_iii},
                   {"k1", e.monotonicity.k1},
                   {"k2", e.monotonicity.k2},
                   {"witness_i", e.witness_i},
                   {"witness_ii", e.witness_ii}});
  }
  r.constant = max_CK(ctx);
  r.details = {{"systems", per}};
  if (vacuous) r.status = Status::Vacuous;
  return r;
}

CheckResult check_operators(Context& ctx) {
  CheckResult r;
  const auto& ops = need_ops(ctx);
  const Kernel& K = need_kernel(ctx);
  Json per = Json::array();
  double sandwich = 0.0, gap = 0.0, duality = 0.0;
  std::size_t atoms = 0;
  for (std::size_t t = 0; t < ops.size(); ++t) {
    const auto& op = ops[t];
    gap = std::max(gap, form_agreement_gap(op, ctx.sigma));
    if (gap > policy::form_agreement_rel) raise(Errc::FormMismatch, "system " + std::to_string(t));
    Json sw = Json::array();
    for (int m = 1; m <= 3; ++m) {
      const SandwichReport s = check_sandwich_Tm(op, m, ctx.trials, ctx.sub(100 + 10 * t + m));
      sandwich = std::max(sandwich, s.empirical_C);
      sw.push_back(number_json(s.empirical_C));
    }
    const DualityReport d = check_self_adjoint(op, ctx.trials, ctx.sub(200 + t));
    duality = std::max(duality, d.max_rel_gap);
    const auto gcubes = generalized_cubes(op.generalized(), t);
    const TestingConstants tc = testing_constants([&](const Vec& f) { return op.apply(f, ctx.sigma); },
                                                  [&](const Vec& g) { return op.apply(g, ctx.omega); }, gcubes,
                                                  ctx.sigma, ctx.omega, ctx.e);
    const PointCubeReport pc = check_point_cube_testing(op, ctx.e.p, ctx.e.q, tc.strong, tc.dual);
    atoms += pc.atoms_checked;
    per.push_back({{"C_K", op.C_K()}, {"sandwich_C", sw}, {"duality_gap", d.max_rel_gap},
                   {"point_cubes", op.generalized().point_cubes.size()}, {"joint_atoms", pc.atoms_checked}});
  }
  const EquivalenceReport eq = check_pointwise_equivalence(op_ptrs(ops), K, ctx.sigma, ctx.omega, ctx.trials, ctx.sub(300));
  r.constant = eq.C_upper;
  r.details = {{"systems", per},
               {"form_gap", gap},
               {"sandwich_max", sandwich},
               {"duality_gap", duality},
               {"equivalence",
                {{"C_lower_T", eq.C_lower_T},
                 {"C_lower_Tstar", eq.C_lower_Tstar},
                 {"C_upper", eq.C_upper},
                 {"bound_lower", eq.bound_lower},
                 {"bound_upper", eq.bound_upper}}},
               {"joint_atoms_checked", atoms}};
  if (eq.vacuous) r.status = Status::Vacuous;
  return r;
}

Json norm_json(const NormEstimate& n) {
  Json j{{"lower", number_json(n.lower)}, {"method", n.method}, {"evaluations", n.evaluations},
         {"witness", vec_json(n.witness)}};
  j["spectral"] = n.spectral ? number_json(*n.spectral) : Json(nullptr);
  return j;
}

// Potential-operator verdicts need q < inf; an infinite testing constant means
// the indicator of the offending cube already has infinite image norm, so both
// sides of the characterization are infinite and the check is consistent.
std::optional<CheckResult> potential_precheck(const Context& ctx) {
  if (std::isfinite(ctx.e.q)) return std::nullopt;
  CheckResult r;
  r.status = Status::Vacuous;
  r.witness = "potential operators are characterized only for q < inf";
  return r;
}

template <class F>
CheckResult with_infinite_testing(F&& run) {
  try {
    return run();
  } catch (const Error& err) {
    if (err.code() != Errc::InfiniteTesting) throw;
    CheckResult r;
    r.constant = kInf;
    r.witness = "testing fails at " + err.witness() + "; the norm is infinite on its indicator";
    r.details = {{"testing_fails", true}, {"cube", err.witness()}};
    return r;
  }
}

CheckResult check_theorem_b(Context& ctx) {
  if (auto pre = potential_precheck(ctx)) return *pre;
  return with_infinite_testing([&] {
    CheckResult r;
    const AdjacentFamily& fam = need_family(ctx);
    const Kernel& K = need_kernel(ctx);
    const TheoremBReport b = verdict_theorem_B(K, ctx.sigma, ctx.omega, standard_cubes(fam), ctx.e, ctx.budget, ctx.sub(400));
    r.constant = b.ratio;
    r.details = {{"testing_strong", number_json(b.testing.strong)},
                 {"testing_dual", number_json(b.testing.dual)},
                 {"norm_lb", number_json(b.norm_lb)},
                 {"testing_sum", number_json(b.testing_sum)},
                 {"ratio", number_json(b.ratio)},
                 {"argmax_strong", cube_json(b.testing.argmax_strong)},
                 {"argmax_dual", cube_json(b.testing.argmax_dual)},
                 {"convention_hits", {b.testing.convention_hits_strong, b.testing.convention_hits_dual}},
                 {"norm", norm_json(b.norm)},
                 {"adjoint_norm", norm_json(b.adjoint_norm)}};
    if (b.testing_sum == 0.0) r.status = Status::Vacuous;
    return r;
  });
}

CheckResult check_weak_type(Context& ctx) {
  if (auto pre = potential_precheck(ctx)) return *pre;
  return with_infinite_testing([&] {
    CheckResult r;
    const AdjacentFamily& fam = need_family(ctx);
    const Kernel& K = need_kernel(ctx);
    const auto& ops = need_ops(ctx);
    const WeakTypeReport w =
        verdict_weak_type(K, ctx.sigma, ctx.omega, standard_cubes(fam), op_ptrs(ops), ctx.e, ctx.budget, ctx.sub(500));
    Json dy = Json::array();
    for (const auto& d : w.dyadic)
      dy.push_back({{"system", d.system}, {"weak_lb", number_json(d.weak_lb)}, {"dual_testing", number_json(d.dual_testing)},
                    {"C_m", d.C_m}, {"upper_bound", number_json(d.upper_bound)}});
    r.constant = w.ratio;
    r.details = {{"testing_dual", number_json(w.testing.dual)},
                 {"weak_norm_lb", number_json(w.weak_norm.lower)},
                 {"ratio", number_json(w.ratio)},
                 {"argmax_dual", cube_json(w.testing.argmax_dual)},
                 {"norm", norm_json(w.weak_norm)},
                 {"dyadic", dy}};
    if (w.testing.dual == 0.0) r.status = Status::Vacuous;
    return r;
  });
}

CheckResult check_stopping(Context& ctx) {
  CheckResult r;
  const auto& ops = need_ops(ctx);
  Rng rng(ctx.sub(600));
  double mp1 = 0.0, mp2 = kInf, lemma = 0.0;
  std::size_t cubes1 = 0, points2 = 0, principal = 0;
  for (const auto& op : ops) {
    const ShellParams sp = shell_params(op.C_K());
    for (std::size_t t = 0; t < ctx.trials; ++t) {
      const Vec f = random_nonneg_function(op.size(), rng);
      const auto grid = rho_grid(op.apply(f, ctx.sigma));
      if (!grid.empty()) {
        const double rho = grid[rng.index(grid.size())];
        const PrincipleReport a = check_max_principle_1(op, f, rho, 2.0 * op.C_K());
        const PrincipleReport b = check_max_principle_2(op, f, rho, sp.C_m);
        mp1 = std::max(mp1, a.worst);
        cubes1 += a.cubes;
        if (!b.vacuous) mp2 = std::min(mp2, b.worst);
        points2 += b.points;
      }
      const PrincipalFamily fam = build_principal_cubes(op.system(), ctx.sigma, f);
      principal += fam.cubes.size();
      if (!fam.cubes.empty()) lemma = std::max(lemma, check_mainlemma(fam, ctx.sigma, f, ctx.e.p).worst_ratio);
    }
  }
  Json universal = Json::array();
  double umax = 0.0;
  for (double p : {1.5, 2.0, 4.0}) {
    const UniversalMaximalReport u = check_universal_maximal(ops.front().system(), ctx.sigma, p, ctx.trials, ctx.sub(700));
    universal.push_back({{"p", p}, {"worst_ratio", u.worst_ratio}, {"bound", u.bound}});
    umax = std::max(umax, u.worst_ratio / u.bound);
  }
  r.constant = lemma;
  r.details = {{"max_principle_1_worst", mp1},
               {"max_principle_1_cubes", cubes1},
               {"max_principle_2_worst", number_json(mp2)},
               {"max_principle_2_points", points2},
               {"principal_cubes", principal},
               {"mainlemma_worst", lemma},
               {"universal_maximal", universal},
               {"universal_worst_fraction_of_bound", umax}};
  return r;
}

MaximalParams maximal_params(Context& ctx) {
  const double gamma = ctx.cfg.at("gamma").get<double>();
  try {
    return make_maximal_params(*ctx.space, ctx.mu, gamma);
  } catch (const Error& err) {
    config_error("$.gamma", err.witness());
  }
}

CheckResult check_maximal(Context& ctx) {
  CheckResult r;
  const AdjacentFamily& fam = need_family(ctx);
  const MaximalParams mp = maximal_params(ctx);
  r.details["doubling_constant"] = number_json(mp.doubling_constant);
  if (!std::isfinite(mp.doubling_constant)) {
    r.status = Status::Vacuous;
    r.witness = "mu is not doubling";
    return r;
  }
  const MaximalEquivalenceReport eq = check_maximal_equivalence(fam, mp, ctx.trials, ctx.sub(800));
  r.constant = eq.C_upper;
  r.details["ratio_bound"] = eq.ratio_bound;
  r.details["cover_bound"] = eq.cover_bound;
  r.details["C_lower"] = eq.C_lower;
  r.details["C_upper"] = eq.C_upper;
  bool ac = true;
  for (PointId x = 0; x < ctx.mu.size(); ++x) ac = ac && !(ctx.mu[x] > 0.0 && !(ctx.sigma[x] > 0.0));
  if (ac) r.details["dual_weight_gap"] = dual_weight(ctx.mu, ctx.sigma, ctx.e.p).identity_gap;
  return r;
}

CheckResult check_theorem_a(Context& ctx) {
  CheckResult r;
  const AdjacentFamily& fam = need_family(ctx);
  const MaximalParams mp = maximal_params(ctx);
  const TheoremAReport a = verdict_theorem_A(fam, mp, ctx.sigma, ctx.omega, ctx.e, ctx.budget, ctx.sub(900));
  r.details = {{"absolutely_continuous", a.absolutely_continuous}};
  if (!a.absolutely_continuous) {
    r.details["violating_set"] = a.violating_set;
    r.details["lhs"] = number_json(a.lhs);
    r.details["rhs"] = number_json(a.rhs);
    r.witness = "necessity: chi_E gives a positive left side against a zero right side";
    return r;
  }
  Json dy = Json::array();
  for (const auto& d : a.dyadic)
    dy.push_back({{"system", d.system}, {"norm_lb", number_json(d.norm_lb)}, {"testing", number_json(d.testing)},
                  {"bound", number_json(d.bound)}});
  r.constant = a.ratio;
  r.details["N1"] = number_json(a.N1);
  r.details["norm"] = norm_json(a.norm);
  r.details["ratio"] = number_json(a.ratio);
  r.details["argmax"] = cube_json(a.argmax);
  r.details["dual_weight_gap"] = a.identity_gap;
  r.details["dyadic"] = dy;
  if (a.N1 == 0.0) r.status = Status::Vacuous;
  return r;
}

PointMeasure resolve_measure(const Json& desc, const std::string& role, const Context& ctx,
                             const std::map<std::string, PointMeasure>& space_measures) {
  const std::string path = "$.measures." + role;
  const std::size_t n = ctx.space->size();
  if (desc.is_string()) {
    const std::string name = desc.get<std::string>();
    if (name == "counting") return PointMeasure::counting(n);
    if (name == "zero") return PointMeasure::zero(n);
    auto it = space_measures.find(name);
    if (it == space_measures.end()) config_error(path, "unknown measure \"" + name + "\"");
    return it->second;
  }
  if (desc.is_array()) {
    if (desc.size() != n) config_error(path, "expected " + std::to_string(n) + " masses");
    Vec m;
    for (std::size_t i = 0; i < n; ++i) {
      if (!desc[i].is_number() || !(desc[i].get<double>() >= 0.0))
        config_error(path + "[" + std::to_string(i) + "]", "mass must be a nonnegative number");
      m.push_back(desc[i].get<double>());
    }
    return PointMeasure(std::move(m));
  }
  const Json& r = desc.at("random");
  MeasureDraw d{r.at("log_low").get<double>(), r.at("log_high").get<double>(), r.at("zero_fraction").get<double>()};
  Rng rng(ctx.sub(fnv1a(role)));
  return random_measure(n, rng, d);
}

void build_space_context(Context& ctx) {
  const Json& s = ctx.cfg.at("space");
  std::map<std::string, PointMeasure> space_measures;
  if (s.contains("generator")) {
    GeneratorParams gp;
    gp.n = s.at("n").get<std::size_t>();
    gp.dim = s.at("dim").get<std::size_t>();
    gp.power = s.at("power").get<double>();
    gp.branching = s.at("branching").get<std::size_t>();
    gp.depth = s.at("depth").get<std::size_t>();
    try {
      GeneratedSpace g = generate_space(s.at("generator").get<std::string>(), gp, s.at("seed").get<std::uint64_t>());
      ctx.space = std::make_shared<const QuasiMetricSpace>(std::move(g.space));
      space_measures = std::move(g.measures);
    } catch (const Error& err) {
      if (err.code() == Errc::ConfigError) throw;
      config_error("$.space", std::string(errc_name(err.code())) + ": " + err.witness());
    }
  } else {
    SpaceFile f = s.contains("file") ? load_space_file(s.at("file").get<std::string>()) : parse_space(s.at("inline"), "$.space.inline");
    ctx.space = std::make_shared<const QuasiMetricSpace>(std::move(f.space));
    space_measures = std::move(f.measures);
  }
  const Json& m = ctx.cfg.at("measures");
  ctx.sigma = resolve_measure(m.at("sigma"), "sigma", ctx, space_measures);
  ctx.omega = resolve_measure(m.at("omega"), "omega", ctx, space_measures);
  ctx.mu = resolve_measure(m.at("mu"), "mu", ctx, space_measures);
  ctx.named = space_measures;
  ctx.named["sigma"] = ctx.sigma;
  ctx.named["omega"] = ctx.omega;
  ctx.named["mu"] = ctx.mu;
  ctx.named["counting"] = PointMeasure::counting(ctx.space->size());
}

}  // namespace

const char* status_name(Status s) noexcept {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::Vacuous: return "vacuous";
    case Status::NonStrict: return "non-strict";
  }
  return "fail";
}

Json number_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

std::string fnv1a_hex(const std::string& text) { return hex64(fnv1a(text)); }

const std::vector<std::string>& all_checks() { return kChecks; }

bool Report::any_fail() const {
  return std::any_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.status == Status::Fail; });
}

const CheckResult* Report::find(const std::string& check) const {
  for (const auto& c : checks)
    if (c.name == check) return &c;
  return nullptr;
}

Json Report::to_json(bool with_environment) const {
  Json cs = Json::array();
  for (const auto& c : checks) {
    Json j{{"name", c.name}, {"status", status_name(c.status)}, {"witness", c.witness}, {"details", c.details}};
    j["constant"] = c.constant ? number_json(*c.constant) : Json(nullptr);
    cs.push_back(std::move(j));
  }
  Json tol = Json::array();
  for (const auto& t : policy::table) tol.push_back({{"name", t.name}, {"value", t.value}, {"use", t.use}});
  Json out{{"name", name}, {"scenario_hash", scenario_hash}, {"geometry", geometry}, {"checks", cs}, {"tolerances", tol}};
  if (with_environment) out["environment"] = environment;
  return out;
}

std::string Report::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "scenario,hash,check,status,constant,witness\n";
  for (const auto& c : checks) {
    std::string w = c.witness;
    std::replace(w.begin(), w.end(), '"', '\'');
    os << name << "," << scenario_hash << "," << c.name << "," << status_name(c.status) << ",";
    if (c.constant) os << *c.constant;
    os << ",\"" << w << "\"\n";
  }
  return os.str();
}

Scenario parse_scenario(const Json& j) {
  if (!j.is_object()) config_error("$", "scenario must be an object");
  Json cfg;
  cfg["name"] = get_string_or(j, "name", "scenario", "$");
  if (j.contains("seed") && !j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
    config_error("$.seed", "expected an unsigned integer");
  cfg["seed"] = j.value("seed", std::uint64_t{0});

  if (!j.contains("space")) config_error("$.space", "missing");
  const Json& s = j.at("space");
  if (!s.is_object()) config_error("$.space", "expected an object");
  if (s.contains("generator")) {
    const GeneratorParams d;
    cfg["space"] = {{"generator", get_string_or(s, "generator", "", "$.space")},
                    {"n", get_count_or(s, "n", d.n, "$.space")},
                    {"dim", get_count_or(s, "dim", d.dim, "$.space")},
                    {"power", get_number_or(s, "power", d.power, "$.space")},
                    {"branching", get_count_or(s, "branching", d.branching, "$.space")},
                    {"depth", get_count_or(s, "depth", d.depth, "$.space")},
                    {"seed", get_count_or(s, "seed", 0, "$.space")}};
  } else if (s.contains("file")) {
    cfg["space"] = {{"file", get_string_or(s, "file", "", "$.space")}};
  } else if (s.contains("inline")) {
    cfg["space"] = {{"inline", s.at("inline")}};
  } else {
    config_error("$.space", "expected \"generator\", \"file\" or \"inline\"");
  }

  const Json m = j.value("measures", Json::object());
  if (!m.is_object()) config_error("$.measures", "expected an object");
  for (const char* role : {"sigma", "omega", "mu"})
    cfg["measures"][role] = normalize_measure(m.contains(role) ? m.at(role) : Json("counting"),
                                              std::string("$.measures.") + role);

  if (j.contains("kernel")) {
    if (!j.at("kernel").is_object()) config_error("$.kernel", "expected an object");
    cfg["kernel"] = j.at("kernel");
  }

  const Json d = j.value("dyadic", Json::object());
  if (!d.is_object()) config_error("$.dyadic", "expected an object");
  Json dy;
  if (d.contains("delta") && d.at("delta").is_string()) {
    if (d.at("delta").get<std::string>() != "auto") config_error("$.dyadic.delta", "expected a number or \"auto\"");
    dy["delta"] = "auto";
  } else {
    dy["delta"] = d.contains("delta") ? Json(get_number(d, "delta", "$.dyadic")) : Json("auto");
  }
  dy["x0"] = get_count_or(d, "x0", 0, "$.dyadic");
  dy["systems"] = get_count_or(d, "systems", 16, "$.dyadic");
  if (dy["systems"].get<std::size_t>() == 0) config_error("$.dyadic.systems", "must be positive");
  if (d.contains("target_C")) dy["target_C"] = get_number(d, "target_C", "$.dyadic");
  for (const char* k : {"k_min", "k_max"})
    if (d.contains(k)) {
      if (!d.at(k).is_number_integer()) config_error(std::string("$.dyadic.") + k, "expected an integer");
      dy[k] = d.at(k).get<int>();
    }
  if (d.contains("strict") && !d.at("strict").is_boolean()) config_error("$.dyadic.strict", "expected a boolean");
  dy["strict"] = d.value("strict", true);
  cfg["dyadic"] = dy;

  const Json ex = j.value("exponents", Json::object());
  const double p = get_number_or(ex, "p", 2.0, "$.exponents");
  double q = p;
  if (ex.contains("q") && ex.at("q").is_string()) {
    if (ex.at("q").get<std::string>() != "inf") config_error("$.exponents.q", "expected a number or \"inf\"");
    q = kInf;
  } else {
    q = get_number_or(ex, "q", p, "$.exponents");
  }
  try {
    make_exponents(p, q, true);
  } catch (const Error& err) {
    config_error("$.exponents", err.witness());
  }
  cfg["exponents"] = {{"p", p}, {"q", number_json(q)}};
  cfg["gamma"] = get_number_or(j, "gamma", 0.0, "$");

  Json checks = Json::array();
  const Json c = j.value("checks", Json("all"));
  if (c.is_string() && c.get<std::string>() == "all") {
    checks = kChecks;
  } else if (c.is_array()) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      const std::string path = "$.checks[" + std::to_string(i) + "]";
      if (!c[i].is_string()) config_error(path, "expected a check name");
      if (std::find(kChecks.begin(), kChecks.end(), c[i].get<std::string>()) == kChecks.end())
        config_error(path, "unknown check \"" + c[i].get<std::string>() + "\"");
    }
    for (const auto& name : kChecks)
      if (std::find(c.begin(), c.end(), Json(name)) != c.end()) checks.push_back(name);
  } else {
    config_error("$.checks", "expected \"all\" or an array of check names");
  }
  cfg["checks"] = checks;
  cfg["budget"] = normalize_budget(j.value("budget", Json::object()), "$.budget");
  cfg["trials"] = get_count_or(j, "trials", 100, "$");
  return {cfg};
}

Report run_scenario(const Scenario& scenario) {
  using clock = std::chrono::steady_clock;
  Context ctx;
  ctx.cfg = scenario.config;
  ctx.seed = ctx.cfg.at("seed").get<std::uint64_t>();
  const Json& ex = ctx.cfg.at("exponents");
  ctx.e = {ex.at("p").get<double>(), ex.at("q").is_string() ? kInf : ex.at("q").get<double>()};
  ctx.budget = budget_of(ctx.cfg.at("budget"));
  ctx.trials = ctx.cfg.at("trials").get<std::size_t>();
  ctx.strict = ctx.cfg.at("dyadic").at("strict").get<bool>();

  Report rep;
  rep.name = ctx.cfg.at("name").get<std::string>();
  rep.scenario_hash = fnv1a_hex(ctx.cfg.dump());
  Json timings = Json::object();
  const auto t0 = clock::now();
  build_space_context(ctx);
  rep.geometry = {{"n", ctx.space->size()}, {"a0", ctx.space->a0()}};

  const std::map<std::string, std::function<CheckResult(Context&)>> runners = {
      {"space", check_space},         {"dyadic", check_dyadic},       {"kernel", check_kernel},
      {"operators", check_operators}, {"theorem_b", check_theorem_b}, {"weak_type", check_weak_type},
      {"stopping", check_stopping},   {"maximal", check_maximal},     {"theorem_a", check_theorem_a}};
  for (const auto& name : ctx.cfg.at("checks")) {
    const std::string check = name.get<std::string>();
    const auto start = clock::now();
    CheckResult r;
    try {
      r = runners.at(check)(ctx);
    } catch (const Error& err) {
      if (err.code() == Errc::ConfigError) throw;
      r = CheckResult{};
      r.status = Status::Fail;
      r.witness = std::string(errc_name(err.code())) + ": " + err.witness();
    }
    r.name = check;
    if (!ctx.strict && r.status == Status::Pass) r.status = Status::NonStrict;
    rep.checks.push_back(std::move(r));
    timings[check] = std::chrono::duration<double, std::milli>(clock::now() - start).count();
  }

  if (ctx.family) {
    const auto& s0 = *ctx.family->systems.front();
    rep.geometry["delta"] = s0.delta();
    rep.geometry["L"] = ctx.family->L();
    rep.geometry["k_min"] = s0.k_min();
    rep.geometry["k_max"] = s0.k_max();
    rep.geometry["observed_C"] = ctx.family->observed_C;
  }
  if (!ctx.estimates.empty()) rep.geometry["C_K"] = max_CK(ctx);
  timings["total"] = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  rep.environment = {{"library", "dyadica 0.1.0"},
                     {"compiler", __VERSION__},
                     {"cplusplus", static_cast<long>(__cplusplus)},
                     {"timings_ms", timings}};
  return rep;
}

void set_path(Json& j, const std::string& dotted, const Json& value) {
  Json* cur = &j;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) config_error("$.grid", "bad path \"" + dotted + "\"");
    if (dot == std::string::npos) {
      (*cur)[key] = value;
      return;
    }
    if (!cur->contains(key) || !(*cur)[key].is_object()) (*cur)[key] = Json::object();
    cur = &(*cur)[key];
    start = dot + 1;
  }
}

bool SweepResult::any_fail() const {
  return std::any_of(reports.begin(), reports.end(), [](const Report& r) { return r.any_fail(); });
}

Json SweepResult::summary_json() const {
  Json out = Json::array();
  for (const auto& g : summary) {
    Json m = Json::object();
    for (const auto& [k, v] : g.max_constant) m[k] = number_json(v);
    out.push_back({{"geometry", g.key}, {"reports", g.reports}, {"failures", g.failures}, {"max_constant", m}});
  }
  return out;
}

SweepResult sweep(const Json& scenario_template, const std::vector<GridAxis>& grid, const std::vector<std::uint64_t>& seeds) {
  std::size_t combos = 1;
  for (const auto& a : grid) combos *= a.values.size();
  if ((grid.empty() && seeds.empty()) || combos == 0) config_error("$.grid", "empty grid");
  const std::vector<std::uint64_t> seed_list =
      seeds.empty() ? std::vector<std::uint64_t>{scenario_template.value("seed", std::uint64_t{0})} : seeds;

  SweepResult out;
  std::map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < combos; ++c) {
    Json cfg = scenario_template;
    std::size_t rest = c;
    for (const auto& a : grid) {
      const Json& v = a.values[rest % a.values.size()];
      rest /= a.values.size();
      for (const auto& p : a.paths) set_path(cfg, p, v);
    }
    for (std::uint64_t s : seed_list) {
      cfg["seed"] = s;
      const Scenario sc = parse_scenario(cfg);
      Report r = run_scenario(sc);
      const Json& n = sc.config;
      const std::string key =
          fnv1a_hex(Json{{"space", n.at("space")}, {"dyadic", n.at("dyadic")}, {"exponents", n.at("exponents")}}.dump());
      auto [it, fresh] = index.emplace(key, out.summary.size());
      if (fresh) out.summary.push_back({key, 0, 0, {}});
      GeometrySummary& g = out.summary[it->second];
      ++g.reports;
      if (r.any_fail()) ++g.failures;
      for (const auto& ch : r.checks) {
        if (!ch.constant || ch.status == Status::Fail) continue;
        auto [m, ins] = g.max_constant.emplace(ch.name, *ch.constant);
        if (!ins) m->second = std::max(m->second, *ch.constant);
      }
      out.reports.push_back(std::move(r));
    }
  }
  return out;
}

SweepResult sweep_from_config(const Json& config) {
  if (!config.is_object() || !config.contains("template")) config_error("$.template", "missing");
  std::vector<GridAxis> grid;
  if (config.contains("grid")) {
    const Json& g = config.at("grid");
    if (g.is_object()) {
      for (auto it = g.begin(); it != g.end(); ++it) {
        if (!it.value().is_array()) config_error("$.grid." + it.key(), "expected an array of values");
        grid.push_back({{it.key()}, it.value().get<std::vector<Json>>()});
      }
    } else if (g.is_array()) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        const std::string path = "$.grid[" + std::to_string(i) + "]";
        if (!g[i].is_object() || !g[i].contains("paths") || !g[i].contains("values") || !g[i].at("paths").is_array() ||
            !g[i].at("values").is_array())
          config_error(path, "expected {\"paths\": [...], \"values\": [...]}");
        grid.push_back({g[i].at("paths").get<std::vector<std::string>>(), g[i].at("values").get<std::vector<Json>>()});
      }
    } else {
      config_error("$.grid", "expected an object or an array");
    }
  }
  std::vector<std::uint64_t> seeds;
  if (config.contains("seeds")) {
    const Json& s = config.at("seeds");
    if (s.is_array()) {
      for (const auto& v : s) seeds.push_back(v.get<std::uint64_t>());
    } else if (s.is_object()) {
      const std::size_t start = get_count_or(s, "start", 0, "$.seeds");
      const std::size_t count = get_count_or(s, "count", 0, "$.seeds");
      for (std::size_t i = 0; i < count; ++i) seeds.push_back(start + i);
    } else {
      config_error("$.seeds", "expected an array or {\"start\", \"count\"}");
    }
  }
  return sweep(config.at("template"), grid, seeds);
}

}  // namespace dyadica
