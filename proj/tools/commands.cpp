#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>

#include "output.hpp"
#include "spec_io.hpp"
#include "stabcert/acceptance.hpp"
#include "stabcert/error.hpp"
#include "stabcert/feedback.hpp"
#include "stabcert/lrconstants.hpp"
#include "stabcert/periodic.hpp"
#include "stabcert/projection.hpp"
#include "stabcert/semigroup.hpp"
#include "stabcert/weakobs.hpp"

namespace stabcert::cli {

namespace {

int exit_code(CertStatus s) {
  switch (s) {
    case CertStatus::certified: return 0;
    case CertStatus::refuted: return 1;
    case CertStatus::inconclusive: return 2;
  }
  return 2;
}

CertStatus combine(const std::vector<CertStatus>& parts) {
  if (parts.empty()) return CertStatus::inconclusive;
  if (std::any_of(parts.begin(), parts.end(), [](CertStatus s) { return s == CertStatus::refuted; })) {
    return CertStatus::refuted;
  }
  if (std::all_of(parts.begin(), parts.end(), [](CertStatus s) { return s == CertStatus::certified; })) {
    return CertStatus::certified;
  }
  return CertStatus::inconclusive;
}

std::pair<std::string, double> split_tol(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) throw InputError("--tol expects key=value, got '" + kv + "'");
  try {
    std::size_t used = 0;
    const double v = std::stod(kv.substr(eq + 1), &used);
    if (used != kv.size() - eq - 1) throw std::invalid_argument("trailing");
    return {kv.substr(0, eq), v};
  } catch (const std::exception&) {
    throw InputError("--tol value is not a number in '" + kv + "'");
  }
}

CheckOptions check_options(const RunConfig& cfg) {
  CheckOptions co;
  co.seed = cfg.seed;
  for (const auto& kv : cfg.tol) {
    const auto [key, v] = split_tol(kv);
    if (key == "samples") co.samples = static_cast<int>(v);
    else if (key == "ascent_iterations") co.ascent_iterations = static_cast<int>(v);
    else if (key == "quad_rel_tol") co.quad.rel_tol = v;
    else throw InputError("unknown tolerance key '" + key + "' (samples, ascent_iterations, quad_rel_tol)");
  }
  if (co.samples < 1) throw InputError("samples must be positive");
  return co;
}

Json base_report(const RunConfig& cfg, const std::string& statement, const Json& system) {
  Json r;
  r["schema_version"] = kSchemaVersion;
  r["command"] = cfg.command;
  r["statement"] = statement;
  r["seed"] = cfg.seed;
  if (!system.is_null()) r["system"] = system;
  return r;
}

LoadedSystem require_system(const RunConfig& cfg) {
  if (cfg.system.empty()) throw InputError("--system is required for '" + cfg.command + "'");
  return load_system(read_spec(cfg.system));
}

Json certificate_json(const WeakObsCertificate& c) {
  Json j;
  j["T"] = num(c.horizon);
  j["alpha"] = num(c.alpha);
  j["D"] = num(c.d_const);
  j["C"] = num(c.c_const);
  j["status"] = to_string(c.status);
  j["margin"] = num(c.margin);
  j["sufficient_margin"] = num(c.sufficient_margin);
  j["best_ratio"] = num(c.best_ratio);
  if (c.witness) j["witness"] = to_json(*c.witness);
  return j;
}

CsvTable certificate_table() {
  return CsvTable({"alpha", "T", "D", "C", "status", "margin", "sufficient_margin", "best_ratio"});
}

void add_certificate_row(CsvTable& t, const WeakObsCertificate& c) {
  t.row().cell(c.alpha).cell(c.horizon).cell(c.d_const).cell(c.c_const).cell(std::string(to_string(c.status)))
      .cell(c.margin).cell(c.sufficient_margin).cell(c.best_ratio);
}

// ---------------------------------------------------------------------------

int cmd_gramian(const RunConfig& cfg) {
  const LoadedSystem ls = require_system(cfg);
  if (!ls.lti) throw InputError("gramian needs a matrix or spectral system");
  GramianMethod method = GramianMethod::automatic;
  if (cfg.method == "closed") method = GramianMethod::closed_form;
  else if (cfg.method == "quad") method = GramianMethod::quadrature;
  else if (cfg.method != "auto") throw InputError("--method must be auto, closed or quad");
  if (!(cfg.horizon > 0.0)) throw InputError("--T must be positive");
  const CheckOptions co = check_options(cfg);
  const GramianResult g = observability_gramian(*ls.lti, cfg.horizon, co.quad, method);
  Eigen::SelfAdjointEigenSolver<Matrix> es(g.matrix, Eigen::EigenvaluesOnly);

  Json r = base_report(cfg, "observability-gramian", ls.echo);
  r["T"] = num(cfg.horizon);
  r["method"] = cfg.method;
  r["gramian"] = to_json(g.matrix);
  r["eigenvalues"] = to_json(es.eigenvalues());
  r["quadrature_error_estimate"] = num(g.quadrature_error_estimate);
  write_json(cfg.out / "report.json", r);
  matrix_table(g.matrix, "g").write(cfg.out / "gramian.csv");
  std::printf("gramian: %ld states, lambda_min %.6g, lambda_max %.6g\n", static_cast<long>(g.matrix.rows()),
              es.eigenvalues()(0), es.eigenvalues()(es.eigenvalues().size() - 1));
  return 0;
}

struct SweepOutcome {
  Json json;
  CertStatus verdict;
};

SweepOutcome weakobs_sweep(const RunConfig& cfg, const LtiSystem& sys, CsvTable& table) {
  SweepOptions so;
  so.check = check_options(cfg);
  so.threads = cfg.threads;
  if (cfg.statement == "ii") so.statement = Statement::ii_grid;
  else if (cfg.statement == "iii") so.statement = Statement::iii_grid;
  else throw InputError("--statement must be ii or iii");
  so.t0 = cfg.t0;
  const auto alphas = cfg.alpha_grid.empty() ? default_alpha_grid() : cfg.alpha_grid;
  const auto horizons = cfg.t_grid.empty() ? default_horizon_grid() : cfg.t_grid;
  ResidualRule rule = unit_residual_rule();
  if (cfg.residual_c != 1.0) {
    if (!(cfg.residual_c > 0.0)) throw InputError("--residual-c must be positive");
    const double c = cfg.residual_c;
    rule = ResidualRule{"constant", [c](double) { return c; }};
  }
  const CertificateFamily fam = sweep_alpha(sys, alphas, horizons, rule, so);

  Json j;
  j["form"] = to_string(fam.statement);
  j["t0"] = num(fam.t0);
  j["residual_source"] = fam.residual_source;
  Json certs = Json::array();
  for (const auto& c : fam.certificates) {
    certs.push_back(certificate_json(c));
    add_certificate_row(table, c);
  }
  j["certificates"] = certs;
  Json per = Json::array();
  for (const auto& v : fam.per_alpha) {
    per.push_back({{"alpha", num(v.alpha)}, {"C", num(v.c_const)}, {"D", num(v.d_const)},
                   {"status", to_string(v.status)}});
  }
  j["per_alpha"] = per;
  j["verdict"] = to_string(fam.verdict);
  return {j, fam.verdict};
}

int cmd_weakobs(const RunConfig& cfg) {
  const LoadedSystem ls = require_system(cfg);
  if (!ls.lti) throw InputError("weakobs needs a matrix or spectral system");
  CsvTable table = certificate_table();
  SweepOutcome s = weakobs_sweep(cfg, *ls.lti, table);
  Json r = base_report(cfg, "weak-observability-family", ls.echo);
  for (auto& [k, v] : s.json.items()) r[k] = v;
  write_json(cfg.out / "report.json", r);
  table.write(cfg.out / "certificates" / "certificates.csv");
  std::printf("weakobs verdict: %s\n", to_string(s.verdict));
  return exit_code(s.verdict);
}

SweepOutcome constants_pipeline(const RunConfig& cfg, const LoadedSystem& ls, CsvTable& table) {
  if (!ls.spectral) throw InputError("constants needs a spectral system (point_heat, hermite, fractional)");
  const SpectralSystem& spec = *ls.spectral;
  const LtiSystem sys = spec.to_lti();
  const ProjectionFamily fam = spectral_projection_family(spec, first_modes_rule(), static_cast<int>(spec.modes()));
  const SemigroupBound bound = fit_semigroup_bound(sys);
  Eigen::JacobiSVD<Matrix> svd(sys.b());
  const double b_norm = svd.singularValues()(0);
  const CheckOptions co = check_options(cfg);
  const auto alphas = cfg.alpha_grid.empty() ? std::vector<double>{1.0, 2.0} : cfg.alpha_grid;
  const auto horizons = cfg.t_grid.empty() ? std::vector<double>{0.5, 1.0, 1.25, 1.5, 2.0, 3.0, 4.0} : cfg.t_grid;

  Json j;
  j["semigroup_bound"] = {{"M", num(bound.m_big)}, {"delta0", num(bound.delta0)}};
  j["b_norm"] = num(b_norm);
  j["t0"] = num(cfg.t0);
  Json routes = Json::array();
  std::vector<CertStatus> parts;
  for (double alpha : alphas) {
    int k = 1;
    while (k < fam.size() && !(fam.alpha_k[k - 1] > alpha)) ++k;
    const double alpha_k = fam.alpha_k[k - 1];
    const double m_k = fam.m_k[k - 1];

    auto check_route = [&](const std::string& name, const CertificateConstants& cc, Json& route) {
      Json certs = Json::array();
      std::vector<CertStatus> local;
      for (double t : horizons) {
        if (!cc.valid_for(t)) continue;
        WeakObsCertificate cert;
        cert.horizon = t;
        cert.alpha = alpha;
        cert.d_const = cc.d_const;
        cert.c_const = cc.c_const;
        const WeakObsCertificate r = check_certificate(sys, cert, co);
        certs.push_back(certificate_json(r));
        add_certificate_row(table, r);
        local.push_back(r.status);
      }
      route["route"] = name;
      route["D"] = num(cc.d_const);
      route["C"] = num(cc.c_const);
      route["t_min"] = num(cc.t_min);
      route["t_min_inclusive"] = cc.t_min_inclusive;
      route["certificates"] = certs;
      const CertStatus v = combine(local);
      route["verdict"] = to_string(v);
      parts.push_back(v);
    };

    Json base;
    base["alpha"] = num(alpha);
    base["k"] = k;
    base["alpha_k"] = num(alpha_k);

    Json b1 = base;
    const SpectralConstant sc = estimate_spectral_constant(spec, fam, k);
    b1["C_k"] = num(sc.value);
    if (sc.singular || !(alpha_k > alpha)) {
      b1["route"] = "b1";
      b1["verdict"] = to_string(CertStatus::refuted);
      b1["reason"] = sc.singular ? "B* is not injective on range(P_k)" : "no projection with alpha_k > alpha";
      parts.push_back(CertStatus::refuted);
    } else {
      check_route("b1", constants_b1(bound, m_k, alpha_k, sc.value, b_norm, alpha), b1);
    }
    routes.push_back(b1);

    if (ls.kind == "point_heat" && alpha_k > alpha) {
      Json b2 = base;
      try {
        const double ckt0 = pointwise_c_kt0(*ls.x0, *ls.c, k, cfg.t0);
        b2["C_k_T0"] = num(ckt0);
        check_route("b2", constants_b2(bound, cfg.t0, ckt0, m_k, alpha_k, b_norm, alpha), b2);
      } catch (const VanishingModeError& e) {
        b2["route"] = "b2";
        b2["verdict"] = to_string(CertStatus::refuted);
        b2["vanishing_mode"] = e.mode();
        b2["reason"] = e.what();
        parts.push_back(CertStatus::refuted);
      }
      routes.push_back(b2);
    }
  }
  j["routes"] = routes;
  const CertStatus verdict = combine(parts);
  j["verdict"] = to_string(verdict);
  return {j, verdict};
}

int cmd_constants(const RunConfig& cfg) {
  const LoadedSystem ls = require_system(cfg);
  CsvTable table = certificate_table();
  SweepOutcome s = constants_pipeline(cfg, ls, table);
  Json r = base_report(cfg, "spectral-dissipative-constants", ls.echo);
  for (auto& [k, v] : s.json.items()) r[k] = v;
  write_json(cfg.out / "report.json", r);
  table.write(cfg.out / "certificates" / "constants.csv");
  std::printf("constants verdict: %s\n", to_string(s.verdict));
  return exit_code(s.verdict);
}

int cmd_stabilize(const RunConfig& cfg) {
  const LoadedSystem ls = require_system(cfg);
  if (!ls.lti) throw InputError("stabilize needs a matrix or spectral system");
  if (!(cfg.mu > 0.0)) throw InputError("--mu must be positive");
  const LtiSystem& sys = *ls.lti;
  Json r = base_report(cfg, "shifted-riccati-feedback", ls.echo);
  r["mu"] = num(cfg.mu);
  FeedbackResult fb;
  try {
    fb = solve_shifted_riccati(sys, cfg.mu);
  } catch (const UnstabilizableError& e) {
    r["stabilizable"] = false;
    r["uncontrollable_eigenvalue"] = {num(e.real_part()), num(e.imag_part())};
    r["reason"] = e.what();
    write_json(cfg.out / "report.json", r);
    std::printf("not stabilizable at mu = %g: %s\n", cfg.mu, e.what());
    return 1;
  }
  const double horizon = cfg.decay_horizon.value_or(std::clamp(10.0 / fb.measured_rate, 1.0, 100.0));
  r["stabilizable"] = true;
  r["riccati_residual"] = num(fb.residual);
  r["measured_rate"] = num(fb.measured_rate);
  r["shifted_rate"] = num(fb.shifted_rate);
  r["measured_overshoot"] = num(fb.measured_overshoot);
  r["gain"] = to_json(fb.gain_k);
  r["riccati_p"] = to_json(fb.riccati_p);
  // Weak observability constants implied by the feedback at alpha = mu.
  const WeakObsCertificate implied = certificate_from_feedback(sys, fb, cfg.mu, 1.0);
  r["implied_certificate"] = {{"alpha", num(implied.alpha)}, {"D", num(implied.d_const)}, {"C", num(implied.c_const)}};
  write_json(cfg.out / "report.json", r);
  matrix_table(fb.gain_k, "k").write(cfg.out / "gain.csv");
  CsvTable decay({"t", "norm"});
  for (const auto& [t, n] : decay_curve(sys, fb.gain_k, horizon, cfg.grid)) decay.row().cell(t).cell(n);
  decay.write(cfg.out / "decay" / "decay.csv");
  std::printf("stabilized: rate %.12g (target %g), residual %.3g\n", fb.measured_rate, cfg.mu, fb.residual);
  return 0;
}

Json periodic_certificate_json(const PeriodicCertificate& pc) {
  Json j;
  j["k"] = pc.k;
  j["n_k"] = pc.n_k;
  j["C_k"] = num(pc.c_k);
  j["status"] = to_string(pc.status);
  j["margin"] = num(pc.margin);
  j["sufficient_margin"] = num(pc.sufficient_margin);
  j["best_ratio"] = num(pc.best_ratio);
  if (pc.witness) j["witness"] = to_json(*pc.witness);
  if (!pc.mode_margins.empty()) {
    Json mm = Json::array();
    for (const auto& m : pc.mode_margins) {
      mm.push_back({{"n", m.n}, {"energy", num(m.energy)}, {"energy_lower_bound", num(m.energy_lower_bound)},
                    {"key_factor", num(m.key_factor)}, {"key_fact_holds", m.key_fact_holds}});
    }
    j["mode_margins"] = mm;
  }
  return j;
}

Json witness_json(const NullControllabilityWitness& w, int m, double big_c) {
  return {{"m", m},
          {"C", num(big_c)},
          {"n", w.n},
          {"lhs", num(w.lhs)},
          {"rhs", num(w.rhs)},
          {"energy", num(w.energy)},
          {"energy_bound", num(w.energy_bound)},
          {"truncation_extended", w.extended},
          {"null_controllability", "refuted"}};
}

void write_energies(const PeriodicSystem& sys, int m, const std::filesystem::path& path) {
  const Vector e = periodic_mode_energies(sys, m);
  CsvTable t({"n", "a_n", "window_lo", "window_hi", "energy"});
  for (Eigen::Index i = 0; i < sys.modes(); ++i) {
    const auto& w = sys.windows[static_cast<std::size_t>(i)];
    t.row().cell(static_cast<long long>(i + 1)).cell(sys.a_diag(i)).cell(w.lo).cell(w.hi).cell(e(i));
  }
  t.write(path);
}

int cmd_periodic(const RunConfig& cfg) {
  const LoadedSystem ls = require_system(cfg);
  if (!ls.periodic) throw InputError("periodic needs a periodic_l2 system");
  const PeriodicSystem& sys = *ls.periodic;
  const CheckOptions co = check_options(cfg);
  Json r = base_report(cfg, "periodic-weak-observability", ls.echo);
  r["alpha_series"] = num(*sys.alpha_series);
  PeriodicCertificate pc;
  if (!cfg.c_k && cfg.n_k == 1) {
    pc = example4_stabilizability_check(sys, cfg.k, co.samples, cfg.seed);
  } else {
    const double c = cfg.c_k.value_or(example4_constant(sys, cfg.k));
    pc = periodic_weakobs_check(sys, cfg.k, cfg.n_k, c, co.samples, cfg.seed);
  }
  r["certificate"] = periodic_certificate_json(pc);
  if (cfg.big_c) r["witness"] = witness_json(noncontrollability_witness(sys, cfg.m, *cfg.big_c), cfg.m, *cfg.big_c);
  write_json(cfg.out / "report.json", r);
  write_energies(sys, cfg.n_k, cfg.out / "energies.csv");
  std::printf("periodic check k=%d n_k=%d: %s\n", pc.k, pc.n_k, to_string(pc.status));
  return exit_code(pc.status);
}

Json continued_fraction_json(const ContinuedFractionX0& cf) {
  Json j;
  Json a = Json::array(), la = Json::array(), q = Json::array(), lq = Json::array(), conv = Json::array();
  for (const auto& v : cf.partial_quotients) a.push_back(v ? Json(*v) : Json(nullptr));
  for (double v : cf.log_partial_quotients) la.push_back(num(v));
  for (const auto& v : cf.q) q.push_back(v ? Json(*v) : Json(nullptr));
  for (double v : cf.log_q) lq.push_back(num(v));
  for (const auto& c : cf.convergents) conv.push_back({{"p", c.p}, {"q", c.q}});
  j["partial_quotients"] = a;
  j["log_partial_quotients"] = la;
  j["q"] = q;
  j["log_q"] = lq;
  j["convergents"] = conv;
  j["value"] = num(cf.value);
  j["value_error_bound"] = num(cf.value_error_bound);
  return j;
}

int cmd_example_point_heat(const RunConfig& cfg) {
  Json spec{{"kind", "point_heat"}, {"modes", cfg.modes > 0 ? cfg.modes : 8}, {"c", cfg.c}};
  if (cfg.x0 == "cf") {
    spec["x0"] = "cf";
    spec["depth"] = cfg.depth;
  } else {
    try {
      spec["x0"] = std::stod(cfg.x0);
    } catch (const std::exception&) {
      throw InputError("--x0 must be a number or 'cf'");
    }
  }
  const LoadedSystem ls = load_system(spec);
  Json r = base_report(cfg, "point-control-heat", ls.echo);
  r["x0"] = num(*ls.x0);
  if (ls.continued_fraction) {
    const auto& cf = *ls.continued_fraction;
    r["continued_fraction"] = continued_fraction_json(cf);
    if (!cf.convergents.empty()) {
      const auto& last = cf.convergents.back();
      std::fprintf(stderr, "continued fraction x0: deepest exact convergent %llu/%llu\n",
                   static_cast<unsigned long long>(last.p), static_cast<unsigned long long>(last.q));
    }
  }
  Json ev = Json::array();
  for (Eigen::Index i = 0; i < ls.spectral->modes(); ++i) ev.push_back(num(ls.spectral->eigenvalues(i)));
  r["eigenvalues"] = ev;

  int code = 0;
  CsvTable table = certificate_table();
  if (cfg.check == "weakobs") {
    SweepOutcome s = weakobs_sweep(cfg, *ls.lti, table);
    r["weakobs"] = s.json;
    code = exit_code(s.verdict);
    std::printf("weakobs verdict: %s\n", to_string(s.verdict));
  } else if (cfg.check == "constants") {
    RunConfig c2 = cfg;
    SweepOutcome s = constants_pipeline(c2, ls, table);
    r["constants"] = s.json;
    code = exit_code(s.verdict);
    std::printf("constants verdict: %s\n", to_string(s.verdict));
  } else if (cfg.check != "none") {
    throw InputError("--check must be weakobs, constants or none");
  }
  write_json(cfg.out / "report.json", r);
  if (cfg.check != "none") table.write(cfg.out / "certificates" / "certificates.csv");
  return code;
}

int cmd_example_periodic(const RunConfig& cfg) {
  const int modes = cfg.modes > 0 ? cfg.modes : 10;
  const LoadedSystem ls = load_system(Json{{"kind", "periodic_l2"}, {"modes", modes}});
  const PeriodicSystem& sys = *ls.periodic;
  Json r = base_report(cfg, "periodic-null-controllability-witness", ls.echo);
  r["alpha_series"] = num(*sys.alpha_series);
  r["series_tail_bound"] = num(sys.series_tail_bound);
  Json tau = Json::array();
  for (double t : sys.switch_times) tau.push_back(num(t));
  r["switch_times"] = tau;
  int code = 0;
  if (cfg.refute) {
    const double big_c = cfg.big_c.value_or(10.0);
    const NullControllabilityWitness w = noncontrollability_witness(sys, cfg.m, big_c);
    r["witness"] = witness_json(w, cfg.m, big_c);
    std::printf("null controllability over %d period(s) refuted: n = %d, e^{-nm} = %.6g > C*sqrt(energy) = %.6g\n",
                cfg.m, w.n, w.lhs, w.rhs);
    code = 1;
  }
  if (cfg.k < static_cast<int>(sys.modes())) {
    const PeriodicCertificate pc = example4_stabilizability_check(sys, cfg.k, check_options(cfg).samples, cfg.seed);
    r["stabilizability"] = periodic_certificate_json(pc);
    std::printf("stabilizability inequality k=%d: %s\n", cfg.k, to_string(pc.status));
    if (!cfg.refute) code = exit_code(pc.status);
  }
  write_json(cfg.out / "report.json", r);
  write_energies(sys, cfg.m, cfg.out / "energies.csv");
  return code;
}

int cmd_verify_all(const RunConfig& cfg) {
  AcceptanceOptions opts;
  opts.threads = cfg.threads;
  for (const auto& kv : cfg.tol) {
    const auto [key, v] = split_tol(kv);
    try {
      opts.tol.set(key, v);
    } catch (const DomainError& e) {
      throw InputError(e.what());
    }
  }
  const auto results = run_acceptance(opts);
  Json r = base_report(cfg, "acceptance-suite", Json());
  Json tol;
  for (const auto& [k, v] : opts.tol.as_map()) tol[k] = num(v);
  r["tolerances"] = tol;
  Json rows = Json::array();
  bool all = true;
  for (const auto& c : results) {
    std::printf("%s\n", format_result(c).c_str());
    rows.push_back({{"id", c.id}, {"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    all = all && c.passed;
  }
  r["criteria"] = rows;
  r["all_passed"] = all;
  write_json(cfg.out / "report.json", r);
  std::printf("%s\n", all ? "all criteria passed" : "some criteria FAILED");
  return all ? 0 : 1;
}

}  // namespace

int run(const RunConfig& cfg) {
  try {
    if (cfg.command == "gramian") return cmd_gramian(cfg);
    if (cfg.command == "weakobs") return cmd_weakobs(cfg);
    if (cfg.command == "constants") return cmd_constants(cfg);
    if (cfg.command == "stabilize") return cmd_stabilize(cfg);
    if (cfg.command == "periodic") return cmd_periodic(cfg);
    if (cfg.command == "example") {
      if (cfg.example == "point-heat") return cmd_example_point_heat(cfg);
      if (cfg.example == "periodic-l2") return cmd_example_periodic(cfg);
      throw InputError("unknown example '" + cfg.example + "'");
    }
    if (cfg.command == "verify-all") return cmd_verify_all(cfg);
  } catch (const DimensionError& e) {
    throw InputError(e.what());
  } catch (const DomainError& e) {
    throw InputError(e.what());
  }
  throw InputError("unknown command '" + cfg.command + "'");
}

}  // namespace stabcert::cli
