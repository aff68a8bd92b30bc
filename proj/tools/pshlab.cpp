// pshlab command-line front end: classify boundary points, run certificate
// suites, build defining-function modifications, and emit deterministic JSON
// reports.
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "pshlab/boundary.hpp"
#include "pshlab/certify.hpp"
#include "pshlab/classify.hpp"
#include "pshlab/construct.hpp"
#include "pshlab/dsl.hpp"
#include "pshlab/gallery.hpp"
#include "pshlab/report.hpp"

using namespace pshlab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOperational = 1;
constexpr int kExitMathFail = 2;

struct FieldSpec {
  std::string inline_dsl;
  std::string file_path;
  std::string gallery;
};

struct CommonOptions {
  FieldSpec field;
  std::string point_text;
  std::string box_text;
  int samples = 2000;
  int levels = 3;
  double tol_zero = 1e-7;
  double tol_bdry = kTolBdry;
  double lambda_min = kLambdaMin;
  double psd_tol = kPsdTol;
  std::uint64_t seed = 1;
  std::string out_path;
  std::string multiplier;
  std::string emit_plots;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool wants_point) {
  cmd->add_option("--field", opts.field.inline_dsl, "inline DSL expression for r");
  cmd->add_option("--file", opts.field.file_path, "file containing a DSL expression");
  cmd->add_option("--gallery", opts.field.gallery,
                  "gallery id with params, e.g. omega_local:k=3 or model:a=4/3");
  if (wants_point) cmd->add_option("--point", opts.point_text, "boundary point x,y,u,v");
  cmd->add_option("--box", opts.box_text, "sample box lo_x,lo_y,lo_u,lo_v,hi_x,hi_y,hi_u,hi_v");
  cmd->add_option("--samples", opts.samples, "samples per refinement level")->check(CLI::Range(16, 10000000));
  cmd->add_option("--levels", opts.levels, "number of refinement levels")->check(CLI::Range(2, 16));
  cmd->add_option("--tol-zero", opts.tol_zero, "relative zero threshold for derivative words");
  cmd->add_option("--tol-bdry", opts.tol_bdry, "boundary tolerance |r(p)|");
  cmd->add_option("--lambda-min", opts.lambda_min, "denominator floor for ratio certificates");
  cmd->add_option("--psd-tol", opts.psd_tol, "eigenvalue tolerance for psd scans");
  cmd->add_option("--seed", opts.seed, "rng seed (fixed seed gives byte-identical reports)");
  cmd->add_option("--out", opts.out_path, "write the JSON report here instead of stdout");
  cmd->add_option("--multiplier", opts.multiplier, "DSL multiplier h; the run uses r e^h");
  cmd->add_option("--emit-plots", opts.emit_plots, "directory for CSV plot slices");
}

std::map<std::string, std::string> parse_gallery_params(const std::string& text,
                                                        std::string& id_out) {
  auto colon = text.find(':');
  id_out = text.substr(0, colon);
  std::map<std::string, std::string> params;
  if (colon == std::string::npos) return params;
  std::stringstream ss(text.substr(colon + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw ExprError("bad gallery parameter '" + item + "'");
    params[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return params;
}

struct ResolvedField {
  ScalarField r;
  std::optional<GalleryEntry> entry;
  JsonValue config_json = JsonValue::object();
};

ResolvedField resolve_field(const CommonOptions& opts) {
  ResolvedField out;
  int sources = !opts.field.inline_dsl.empty() + !opts.field.file_path.empty() +
                !opts.field.gallery.empty();
  if (sources != 1)
    throw ExprError("exactly one of --field, --file, --gallery must be given");
  if (!opts.field.inline_dsl.empty()) {
    out.r = parse_field(opts.field.inline_dsl);
    out.config_json.set("field", opts.field.inline_dsl);
  } else if (!opts.field.file_path.empty()) {
    std::ifstream in(opts.field.file_path);
    if (!in) throw ExprError("cannot open field file " + opts.field.file_path);
    std::stringstream ss;
    ss << in.rdbuf();
    out.r = parse_field(ss.str());
    out.config_json.set("file", opts.field.file_path);
  } else {
    std::string id;
    auto params = parse_gallery_params(opts.field.gallery, id);
    out.entry = gallery_make(id, params);
    out.r = out.entry->field;
    out.config_json.set("gallery", opts.field.gallery);
  }
  if (!opts.multiplier.empty()) {
    out.r = graft(out.r, parse_field(opts.multiplier));
    out.config_json.set("multiplier", opts.multiplier);
  }
  return out;
}

Point4 parse_point(const std::string& text) {
  Point4 p;
  std::stringstream ss(text);
  std::string item;
  for (int i = 0; i < 4; ++i) {
    if (!std::getline(ss, item, ',')) throw ExprError("point needs four coordinates");
    p[i] = std::stod(item);
  }
  return p;
}

Box4 parse_box(const std::string& text, const Box4& fallback) {
  if (text.empty()) return fallback;
  std::stringstream ss(text);
  std::string item;
  double vals[8];
  for (int i = 0; i < 8; ++i) {
    if (!std::getline(ss, item, ',')) throw ExprError("box needs eight numbers (lo then hi)");
    vals[i] = std::stod(item);
  }
  return Box4{{vals[0], vals[1], vals[2], vals[3]}, {vals[4], vals[5], vals[6], vals[7]}};
}

void write_report(const CommonOptions& opts, const JsonValue& report) {
  std::string text = report.dump();
  if (opts.out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(opts.out_path, std::ios::binary);
    if (!out) throw ExprError("cannot write " + opts.out_path);
    out << text;
  }
}

JsonValue config_of(const CommonOptions& opts, const ResolvedField& rf) {
  JsonValue cfg = rf.config_json;
  cfg.set("samples", opts.samples);
  cfg.set("levels", opts.levels);
  cfg.set("tol_zero", opts.tol_zero);
  cfg.set("tol_bdry", opts.tol_bdry);
  cfg.set("lambda_min", opts.lambda_min);
  cfg.set("psd_tol", opts.psd_tol);
  cfg.set("seed", static_cast<long long>(opts.seed));
  return cfg;
}

// Default boxes keyed to the gallery entries; a generic fallback otherwise.
Box4 default_box(const ResolvedField& rf) {
  if (rf.entry) {
    const std::string& id = rf.entry->id;
    if (id == "omega_local" || id == "model")
      return {{-0.1, -0.1, -0.05, -0.1}, {0.1, 0.1, 0.02, 0.1}};
    if (id == "omega_global") return {{-0.95, -0.95, -1.05, -0.55}, {0.95, 0.95, 0.05, 0.55}};
    if (id == "tanlog") return {{-1.4, -0.5, -2.0, -1.6}, {1.4, 0.5, 2.0, 1.6}};
  }
  return {{-0.5, -0.5, -0.5, -0.5}, {0.5, 0.5, 0.5, 0.5}};
}

SampleLevels build_levels(const CommonOptions& opts, const ResolvedField& rf) {
  if (rf.entry && (rf.entry->id == "omega_local" || rf.entry->id == "omega_global") &&
      opts.box_text.empty()) {
    int k = rf.entry->params.count("k") ? std::stoi(rf.entry->params.at("k")) : 3;
    return omega_refined_levels(k, rf.entry->id == "omega_global", opts.levels,
                                opts.samples / std::max(1, opts.levels), opts.seed);
  }
  Box4 box = parse_box(opts.box_text, default_box(rf));
  DegenerateLocus locus = rf.entry ? rf.entry->degenerate_locus : DegenerateLocus::None;
  return refined_levels(rf.r, box, locus, opts.levels, opts.samples / std::max(1, opts.levels),
                        opts.seed);
}

std::vector<BoundarySample> flat_samples(const SampleLevels& levels) {
  std::vector<BoundarySample> all;
  for (const auto& level : levels) all.insert(all.end(), level.begin(), level.end());
  return all;
}

int run_classify(const CommonOptions& opts) {
  ResolvedField rf = resolve_field(opts);
  if (opts.point_text.empty()) throw ExprError("classify requires --point");
  Point4 p = parse_point(opts.point_text);
  TypeOptions topts;
  topts.tol_zero = opts.tol_zero;
  topts.tol_bdry = opts.tol_bdry;
  TypeReport rep;
  try {
    rep = classify_point(rf.r, p, topts);
  } catch (const PreconditionError& e) {
    JsonValue result = JsonValue::object();
    result.set("error", e.what());
    write_report(opts, make_report("classify", config_of(opts, rf), std::move(result)));
    return kExitMathFail;
  }
  write_report(opts, make_report("classify", config_of(opts, rf), json_of(rep)));
  return kExitOk;
}

int run_certify(const CommonOptions& opts, const std::string& condition, double df_K,
                double df_eta) {
  ResolvedField rf = resolve_field(opts);
  JsonValue cfg = config_of(opts, rf);
  cfg.set("condition", condition);

  Certificate cert;
  if (condition == "psh-boundary" || condition == "normal" || condition == "sesqui" ||
      condition == "real-coords") {
    SampleLevels levels = build_levels(opts, rf);
    if (condition == "psh-boundary")
      cert = cond_psh_boundary(rf.r, levels, opts.lambda_min);
    else if (condition == "normal")
      cert = cond_normal(rf.r, levels, opts.lambda_min);
    else if (condition == "sesqui")
      cert = cond_sesqui(rf.r, levels, opts.lambda_min);
    else
      cert = cond_real_coords(rf.r, levels, opts.lambda_min);
  } else if (condition == "hx-hy") {
    if (opts.multiplier.empty()) throw ExprError("hx-hy requires --multiplier");
    // The residual equations act on the base field with the candidate h.
    ResolvedField base = resolve_field([&] {
      CommonOptions copy = opts;
      copy.multiplier.clear();
      return copy;
    }());
    SampleLevels levels = build_levels(opts, base);
    cert = check_hx_hy(base.r, parse_field(opts.multiplier), levels, opts.lambda_min);
  } else if (condition == "psd-boundary") {
    SampleLevels levels = build_levels(opts, rf);
    cert = psd_on_samples(rf.r, flat_samples(levels), opts.psd_tol);
  } else if (condition == "psh-open" || condition == "df-bump") {
    SampleLevels levels = build_levels(opts, rf);
    PointLevels mixed = offset_levels(flat_samples(levels), 2, 0.02, opts.seed);
    std::vector<Point4> pts;
    for (auto& lvl : mixed) pts.insert(pts.end(), lvl.begin(), lvl.end());
    if (condition == "psh-open") {
      cert = psh_open_scan(rf.r, pts, opts.psd_tol);
    } else {
      // Keep only points where the bumped field is defined: -r - K r^2 > 0.
      std::vector<Point4> interior;
      for (const auto& q : pts) {
        double rv = eval(rf.r, q);
        if (-rv - df_K * rv * rv > 0) interior.push_back(q);
      }
      if (interior.empty()) throw ExprError("df-bump: no samples inside the validity region");
      cert = df_check(rf.r, df_K, df_eta, interior, opts.psd_tol);
    }
  } else if (condition == "basic-estimate") {
    SampleLevels levels = build_levels(opts, rf);
    PointLevels mixed = offset_levels(flat_samples(levels), opts.levels, 0.05, opts.seed);
    BasicEstimate be = basic_estimate_C(rf.r, mixed);
    JsonValue result = JsonValue::object();
    result.set("C", be.C);
    result.set("diverging", be.diverging);
    result.set("inconclusive", be.inconclusive);
    result.set("skipped_fraction", be.skipped_fraction);
    JsonValue lv = JsonValue::array();
    for (double c : be.level_C) lv.push(c);
    result.set("level_C", std::move(lv));
    write_report(opts, make_report("certify", std::move(cfg), std::move(result)));
    return be.inconclusive ? kExitMathFail : kExitOk;
  } else {
    throw ExprError("unknown condition '" + condition + "'");
  }

  write_report(opts, make_report("certify", std::move(cfg), json_of(cert)));
  if (!cert.witnesses.empty() && !opts.out_path.empty()) {
    std::ofstream wout(opts.out_path + ".witnesses.csv", std::ios::binary);
    if (wout) wout << witnesses_csv(cert);
  }
  return cert.pass() ? kExitOk : kExitMathFail;
}

int run_construct(const CommonOptions& opts, const std::string& recipe, double bend_C,
                  double glob_C, double glob_D) {
  ResolvedField base = resolve_field([&] {
    CommonOptions copy = opts;
    copy.multiplier.clear();
    return copy;
  }());
  JsonValue cfg = config_of(opts, base);
  cfg.set("recipe", recipe);
  JsonValue result = JsonValue::object();

  SampleLevels levels = build_levels(opts, base);
  std::vector<BoundarySample> region = flat_samples(levels);

  auto emit_field = [&](const char* key, const ScalarField& f) {
    try {
      result.set(key, to_dsl(f, 1 << 20));
    } catch (const ExprError&) {
      result.set(key, JsonValue::object().set("graph_nodes", f.graph_size()));
    }
  };

  try {
    if (recipe == "strict4" || recipe == "normal") {
      MultiplierRecipe rec = recipe == "strict4" ? multiplier_strict4(base.r, region)
                                                 : multiplier_normal(base.r, region);
      FrameFields ff = frame_fields(base.r);
      VectorFieldC L{ff.L1, ff.L2};
      ScalarField lambda = levi_field(base.r);
      result.set("kind", recipe);
      emit_field("h", rec.h);
      JsonValue ingredients = JsonValue::object();
      for (const auto& [name, field] : rec.ingredients) {
        try {
          ingredients.set(name, to_dsl(field, 1 << 20));
        } catch (const ExprError&) {
          ingredients.set(name, JsonValue::object().set("graph_nodes", field.graph_size()));
        }
      }
      result.set("ingredients", std::move(ingredients));
      // Residual certificates ride along.
      if (recipe == "strict4") {
        ComplexField Lh = apply_field(L, ComplexField::from_real(rec.h));
        ComplexField F{rec.ingredients.at("F_re"), rec.ingredients.at("F_im")};
        Certificate cert =
            ratio_O(ConditionId::RatioO, abs2(Lh - F), lambda, levels, opts.lambda_min);
        result.set("residual_certificate", json_of(cert));
        write_report(opts, make_report("construct", std::move(cfg), std::move(result)));
        return cert.pass() ? kExitOk : kExitMathFail;
      }
      ComplexField Lh = apply_field(L, ComplexField::from_real(rec.h));
      ComplexField LLbar_h = apply_field(L, apply_field_bar(L, ComplexField::from_real(rec.h)));
      ScalarField F = rec.ingredients.at("F");
      Certificate c1 = ratio_O(ConditionId::RatioO, abs2(Lh), lambda, levels, opts.lambda_min);
      Certificate c2 = ratio_O(ConditionId::RatioO,
                               abs2(LLbar_h - ComplexField{F, constant(0ll)}), lambda, levels,
                               opts.lambda_min);
      result.set("first_order_certificate", json_of(c1));
      result.set("second_order_certificate", json_of(c2));
      write_report(opts, make_report("construct", std::move(cfg), std::move(result)));
      return c1.pass() && c2.pass() ? kExitOk : kExitMathFail;
    }
    if (recipe == "graft") {
      if (opts.multiplier.empty()) throw ExprError("graft requires --multiplier");
      ScalarField rho = graft(base.r, parse_field(opts.multiplier));
      emit_field("field", rho);
      write_report(opts, make_report("construct", std::move(cfg), std::move(result)));
      return kExitOk;
    }
    if (recipe == "bend") {
      ScalarField rho = !opts.multiplier.empty()
                            ? graft(base.r, parse_field(opts.multiplier))
                            : base.r;
      double C = bend_C >= 0 ? bend_C : required_C(rho, region, opts.psd_tol);
      result.set("C", C);
      ScalarField bent = bend(rho, C);
      emit_field("field", bent);
      Certificate cert = psd_on_samples(bent, region, opts.psd_tol);
      result.set("psd_certificate", json_of(cert));
      write_report(opts, make_report("construct", std::move(cfg), std::move(result)));
      return cert.pass() ? kExitOk : kExitMathFail;
    }
    if (recipe == "globalize") {
      Globalized g = globalize_quadratic(base.r, glob_C, glob_D);
      result.set("K1", g.K1);
      result.set("K2", g.K2);
      emit_field("field", g.rho);
      write_report(opts, make_report("construct", std::move(cfg), std::move(result)));
      return kExitOk;
    }
    throw ExprError("unknown recipe '" + recipe + "'");
  } catch (const StrictType4Violation& e) {
    result.set("error", e.what());
    result.set("witness", json_of(e.witness));
    result.set("B", e.B);
    write_report(opts, make_report("construct", std::move(cfg), std::move(result)));
    return kExitMathFail;
  } catch (const TypeExceeds4& e) {
    result.set("error", e.what());
    result.set("witness", json_of(e.witness));
    result.set("B", e.B);
    write_report(opts, make_report("construct", std::move(cfg), std::move(result)));
    return kExitMathFail;
  }
}

void emit_plot_slices(const std::string& dir, std::uint64_t seed) {
  // Lambda along (x, v) grids for the tan-log domain and the k = 3 local
  // domain, as CSV heat-map data.
  struct Slice {
    const char* name;
    GalleryEntry entry;
    double x_max, v_max;
  };
  std::vector<Slice> slices;
  slices.push_back({"tanlog_lambda.csv", gallery_make("tanlog"), 1.4, 1.4});
  slices.push_back({"omega6_lambda.csv", gallery_make("omega_local", {{"k", "3"}}), 0.1, 0.1});
  (void)seed;
  for (const auto& s : slices) {
    ScalarField lam = levi_field(s.entry.field);
    Projector proj(s.entry.field);
    std::ofstream out(dir + "/" + s.name, std::ios::binary);
    if (!out) throw ExprError("cannot write plot slice in " + dir);
    out << "x,v,lambda\n";
    char buf[120];
    for (int i = 0; i <= 60; ++i)
      for (int j = 0; j <= 60; ++j) {
        double x = -s.x_max + 2.0 * s.x_max * i / 60.0;
        double v = -s.v_max + 2.0 * s.v_max * j / 60.0;
        try {
          Point4 p = proj.project({x, 0, 0, v});
          std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", x, v, eval(lam, p));
          out << buf;
        } catch (const ExprError&) {
          // skip unprojectable grid nodes
        }
      }
  }
}

int run_suite(const CommonOptions& opts, int k) {
  JsonValue cfg = JsonValue::object();
  cfg.set("k", k);
  cfg.set("seed", static_cast<long long>(opts.seed));
  cfg.set("samples", opts.samples);
  cfg.set("levels", opts.levels);
  cfg.set("tol_zero", opts.tol_zero);

  JsonValue rows = JsonValue::array();
  bool all_ok = true;
  auto add_row = [&](const std::string& claim, bool verified, JsonValue detail) {
    JsonValue row = JsonValue::object();
    row.set("claim", claim);
    row.set("verified", verified);
    row.set("detail", std::move(detail));
    rows.push(std::move(row));
    all_ok = all_ok && verified;
  };

  TypeOptions topts;
  topts.tol_zero = opts.tol_zero;

  // Local counterexample domain.
  GalleryEntry omega = gallery_make("omega_local", {{"k", std::to_string(k)}});
  {
    TypeReport rep = classify_point(omega.field, {0, 0, 0, 0}, topts);
    add_row("omega_local has finite type 2k at the origin",
            rep.c_p && *rep.c_p == 2 * k, json_of(rep));
  }
  SampleLevels ol = omega_refined_levels(k, false, opts.levels,
                                         opts.samples / std::max(1, opts.levels), opts.seed);
  {
    ScanResult scan = pseudoconvex_scan(flat_samples(ol), 1e-9);
    JsonValue d = JsonValue::object();
    d.set("min_lambda", scan.min_lambda);
    add_row("omega_local is pseudoconvex near the origin", scan.pass, std::move(d));
  }
  {
    Certificate cert = levi_lower_bound_check(k, flat_samples(ol));
    add_row("omega_local Levi form dominates the closed-form lower bound", cert.pass(),
            json_of(cert));
  }
  {
    Certificate cert = cond_psh_boundary(omega.field, ol, omega_lambda_min(k));
    add_row("no defining function of omega_local is psh on the boundary (raw field fails)",
            cert.verdict == Verdict::Fail, json_of(cert));
    int failing = 0;
    auto cands = candidate_multipliers();
    for (const auto& [name, h] : cands) {
      Certificate c = cond_psh_boundary(graft(omega.field, h), ol, omega_lambda_min(k));
      if (c.verdict == Verdict::Fail) ++failing;
    }
    JsonValue d = JsonValue::object();
    d.set("failing_multipliers", failing);
    d.set("total_multipliers", static_cast<long long>(cands.size()));
    add_row("candidate multipliers cannot repair omega_local",
            failing == static_cast<int>(cands.size()), std::move(d));
  }
  {
    std::vector<double> scaling = obstruction_scaling(k, {0.05, 0.1, 0.2});
    bool ok = true;
    JsonValue d = JsonValue::array();
    for (double s : scaling) {
      ok = ok && std::abs(s - 1.0) <= 1e-6;
      d.push(s);
    }
    add_row("loop integral of the obstruction form scales as 8 pi mu_k sigma^{2k-2}", ok,
            std::move(d));
  }

  // Global domain.
  GalleryEntry global = gallery_make("omega_global", {{"k", std::to_string(k)}});
  {
    Box4 box{{-0.95, -0.95, -1.05, -0.55}, {0.95, 0.95, 0.05, 0.55}};
    SampleOptions so;
    so.seed = opts.seed + 101;
    SampleSet far = sample_boundary(global.field, box, opts.samples, so);
    GlobalBounds gb = global_bounds_check(k, far.samples);
    JsonValue d = JsonValue::object();
    d.set("max_abs_z2", gb.max_abs_z2);
    d.set("bound_z2", gb.bound_z2);
    d.set("max_abs_v", gb.max_abs_v);
    d.set("min_u", gb.min_u);
    add_row("omega_global is bounded with the stated coordinate bounds", gb.pass, std::move(d));

    GlobalPscResult psc = global_psc_check(k, far.samples, 10000);
    JsonValue d2 = JsonValue::object();
    d2.set("case1_eps", psc.case1_eps);
    d2.set("case1_count", psc.case1_count);
    d2.set("case2_count", psc.case2_count);
    d2.set("fk_pass", psc.fk_pass);
    add_row("omega_global is pseudoconvex", psc.pass, std::move(d2));
  }

  // Tan-log domain.
  GalleryEntry tanlog = gallery_make("tanlog");
  SampleLevels tl = tanlog_refined_levels(opts.levels, opts.samples / std::max(1, opts.levels),
                                          opts.seed + 7);
  {
    TypeReport rep = classify_point(tanlog.field, {0, 0, 0, 0}, topts);
    add_row("tanlog is of weak type 4 at the origin",
            rep.c_p && *rep.c_p == 4 && rep.strict4 == Strict4Verdict::Weak, json_of(rep));
  }
  {
    Certificate cert = cond_psh_boundary(graft(tanlog.field, parse_field("y+u")), tl,
                                         opts.lambda_min);
    add_row("tanlog with multiplier y+u satisfies the boundary psh ratio condition", cert.pass(),
            json_of(cert));
  }
  {
    Certificate cert = cond_sesqui(tanlog.field, tl, opts.lambda_min);
    add_row("tanlog is not sesquiconvex at the origin", cert.verdict == Verdict::Fail,
            json_of(cert));
  }

  // Model family thresholds.
  {
    bool ok = true;
    JsonValue d = JsonValue::array();
    struct Case {
      const char* a;
      Strict4Verdict strict;
      bool kohn;
    };
    for (const Case& c : {Case{"1/2", Strict4Verdict::Strict, true},
                          Case{"6/5", Strict4Verdict::Strict, false},
                          Case{"4/3", Strict4Verdict::Weak, false}}) {
      GalleryEntry m = gallery_make("model", {{"a", c.a}});
      TypeReport rep = classify_point(m.field, {0, 0, 0, 0}, topts);
      bool row_ok = rep.strict4 == c.strict && rep.kohn4 && *rep.kohn4 == c.kohn;
      ok = ok && row_ok;
      JsonValue e = JsonValue::object();
      e.set("a", c.a);
      e.set("strict4", to_string(rep.strict4));
      e.set("kohn4", rep.kohn4 ? JsonValue(*rep.kohn4) : JsonValue());
      d.push(std::move(e));
    }
    add_row("model family strictness thresholds at 4/3 and 1", ok, std::move(d));
  }

  // Strict type 4 pipeline on u + |z|^4.
  {
    ScalarField quart = parse_field("u + absz2^2");
    Box4 qbox{{-0.2, -0.2, -0.05, -0.2}, {0.2, 0.2, 0.02, 0.2}};
    SampleLevels qlevels = refined_levels(quart, qbox, DegenerateLocus::ZAxis, opts.levels,
                                          opts.samples / std::max(1, opts.levels), opts.seed + 13);
    auto region = flat_samples(qlevels);
    MultiplierRecipe rec = multiplier_strict4(quart, region);
    ScalarField rho = graft(quart, rec.h);
    double C = required_C(rho, region, opts.psd_tol);
    Certificate cert = psd_on_samples(bend(rho, C), region, opts.psd_tol);
    JsonValue d = JsonValue::object();
    d.set("required_C", C);
    d.set("psd", json_of(cert));
    add_row("strict type 4 multiplier plus bending yields a boundary-psh defining function",
            cert.pass(), std::move(d));
  }

  // Type 6 normal derivative.
  {
    Type6Result t6 = type6_normal_vanish(parse_field("u + absz2^3"), {0, 0, 0, 0});
    JsonValue d = JsonValue::object();
    d.set("value", t6.value);
    add_row("normal Levi derivative vanishes at the type 6 model origin", t6.pass, std::move(d));
  }

  if (!opts.emit_plots.empty()) emit_plot_slices(opts.emit_plots, opts.seed);

  JsonValue result = JsonValue::object();
  result.set("all_verified", all_ok);
  result.set("rows", std::move(rows));
  write_report(opts, make_report("suite", std::move(cfg), std::move(result)));
  return all_ok ? kExitOk : kExitMathFail;
}

int run_gallery_list(const CommonOptions& opts) {
  JsonValue arr = JsonValue::array();
  for (const std::string& id : gallery_ids()) {
    std::map<std::string, std::string> params;
    if (id == "tube") params["f"] = "x^4";
    arr.push(json_of(gallery_make(id, params)));
  }
  JsonValue cfg = JsonValue::object();
  write_report(opts, make_report("gallery-list", std::move(cfg), std::move(arr)));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pshlab: plurisubharmonic defining-function laboratory for domains in C^2"};
  app.require_subcommand(1);

  CommonOptions copts;

  auto* classify_cmd = app.add_subcommand("classify", "classify a boundary point");
  add_common(classify_cmd, copts, true);

  auto* certify_cmd = app.add_subcommand("certify", "run a sampled certificate");
  std::string condition;
  double df_K = 0.0, df_eta = 0.9;
  certify_cmd->add_option("condition", condition,
                          "psh-boundary | normal | sesqui | real-coords | hx-hy | psd-boundary | "
                          "psh-open | df-bump | basic-estimate")
      ->required();
  certify_cmd->add_option("--K", df_K, "df-bump: bending constant K");
  certify_cmd->add_option("--eta", df_eta, "df-bump: exponent in (0, 1]");
  add_common(certify_cmd, copts, false);

  auto* construct_cmd = app.add_subcommand("construct", "build a defining-function modification");
  std::string recipe;
  double bend_C = -1.0, glob_C = 0.0, glob_D = 1.0;
  construct_cmd->add_option("recipe", recipe, "strict4 | normal | graft | bend | globalize")
      ->required();
  construct_cmd->add_option("--C", bend_C, "bend: constant (grid-selected when omitted)");
  construct_cmd->add_option("--basic-C", glob_C, "globalize: one-sided Hessian constant");
  construct_cmd->add_option("--D", glob_D, "globalize: bound on |z| over the region");
  add_common(construct_cmd, copts, false);

  auto* suite_cmd = app.add_subcommand("suite", "run the built-in verification matrix");
  int suite_k = 3;
  suite_cmd->add_option("--k", suite_k, "degree parameter for the omega domains")
      ->check(CLI::Range(3, 5));
  add_common(suite_cmd, copts, false);

  auto* gallery_cmd = app.add_subcommand("gallery", "gallery utilities");
  auto* list_cmd = gallery_cmd->add_subcommand("list", "list built-in domains as JSON");
  list_cmd->add_option("--out", copts.out_path, "write the JSON report here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (classify_cmd->parsed()) return run_classify(copts);
    if (certify_cmd->parsed()) return run_certify(copts, condition, df_K, df_eta);
    if (construct_cmd->parsed()) return run_construct(copts, recipe, bend_C, glob_C, glob_D);
    if (suite_cmd->parsed()) return run_suite(copts, suite_k);
    if (gallery_cmd->parsed() && list_cmd->parsed()) return run_gallery_list(copts);
    std::cerr << "no subcommand\n";
    return kExitOperational;
  } catch (const StrictType4Violation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMathFail;
  } catch (const TypeExceeds4& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMathFail;
  } catch (const ExprError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOperational;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOperational;
  }
}
