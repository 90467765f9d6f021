#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "deform.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "graph.hpp"
#include "gromov.hpp"
#include "modulus.hpp"
#include "qhyp.hpp"
#include "svg.hpp"
#include "verify.hpp"
#include "version.hpp"

namespace qhl::cli {

inline const std::vector<std::string> properties{
    "gehring_hayman", "separation",      "pommerenke", "faltensatz",         "uniformity", "llc",
    "boundary_qs",    "deformation_bounds", "bhk_uniform_bounds", "bhk314", "rough_starlike", "qh_sandwich"};

/// Everything that determines a run's output. Validated before any
/// computation and embedded in every report.
struct RunConfig {
  std::string command;
  std::string property;
  std::string domain_path;
  nlohmann::json domain;
  double h = 0.05;
  int stencil = 0;  // 0 picks 16 in 2-D and 26 in 3-D
  std::uint64_t seed = 1;
  std::optional<double> epsilon;
  std::size_t samples = 40;
  std::size_t quadruples = 2000;
  std::size_t triples = 200;
  std::size_t competitors = 3;
  std::string from, to;
  std::string base, anchor;
  double radius = 4.0;
  std::string set_e, set_f;
  double p = 2.0;
  bool deformed = false;
  bool refine = true;
  double refine_tolerance = 0.15;
  std::string out = "-";
  std::vector<std::string> formats;
};

inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j{{"command", c.command},
                   {"domain", c.domain},
                   {"h", c.h},
                   {"stencil", c.stencil},
                   {"seed", c.seed},
                   {"samples", c.samples},
                   {"quadruples", c.quadruples},
                   {"triples", c.triples},
                   {"competitors", c.competitors},
                   {"radius", c.radius},
                   {"p", c.p},
                   {"deformed", c.deformed},
                   {"refine", c.refine},
                   {"refine_tolerance", c.refine_tolerance},
                   {"tool_version", version}};
  if (!c.property.empty()) j["property"] = c.property;
  if (c.epsilon) j["epsilon"] = *c.epsilon;
  for (const auto& [key, value] : {std::pair{"from", &c.from}, {"to", &c.to}, {"base", &c.base},
                                   {"anchor", &c.anchor}, {"E", &c.set_e}, {"F", &c.set_f}})
    if (!value->empty()) j[key] = *value;
  return j;
}

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::vector<double> parse_numbers(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || !std::isfinite(v))
      throw UsageError(std::string("malformed ") + what + ": '" + text + "'");
    out.push_back(v);
  }
  return out;
}

inline Point parse_point(const std::string& text, int dim, const char* what) {
  const auto v = parse_numbers(text, what);
  if (static_cast<int>(v.size()) != dim)
    throw UsageError(std::string(what) + " needs " + std::to_string(dim) + " coordinates");
  Point p;
  for (int a = 0; a < dim; ++a) p[a] = v[a];
  return p;
}

/// "inf:dx,dy" (point at infinity in a direction) or "at:x,y" (boundary point).
inline BoundaryAnchor parse_anchor(const std::string& text, int dim) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw UsageError("anchor must be inf:<direction> or at:<point>");
  const std::string kind = text.substr(0, colon);
  const Point p = parse_point(text.substr(colon + 1), dim, "anchor");
  if (kind == "inf") {
    if (!(p.norm() > 0.0)) throw UsageError("anchor direction must be nonzero");
    return BoundaryAnchor::infinity(p);
  }
  if (kind == "at") return BoundaryAnchor::at(p);
  throw UsageError("anchor must be inf:<direction> or at:<point>");
}

/// Vertex sets for modulus problems: "ball:c..,r", "outside:c..,r" or
/// "box:lo..,hi..".
inline std::function<bool(const Point&)> parse_region(const std::string& text, int dim) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw UsageError("region must be ball:, outside: or box:");
  const std::string kind = text.substr(0, colon);
  const auto v = parse_numbers(text.substr(colon + 1), "region");
  if (kind == "ball" || kind == "outside") {
    if (static_cast<int>(v.size()) != dim + 1) throw UsageError("ball region needs a center and a radius");
    Point c;
    for (int a = 0; a < dim; ++a) c[a] = v[a];
    const double r = v[dim];
    if (kind == "ball") return [c, r](const Point& p) { return distance(p, c) <= r; };
    return [c, r](const Point& p) { return distance(p, c) >= r; };
  }
  if (kind == "box") {
    if (static_cast<int>(v.size()) != 2 * dim) throw UsageError("box region needs two corners");
    return [v, dim](const Point& p) {
      for (int a = 0; a < dim; ++a)
        if (p[a] < v[a] || p[a] > v[dim + a]) return false;
      return true;
    };
  }
  throw UsageError("region must be ball:, outside: or box:");
}

/// Writes via a temporary file in the target directory and renames it into
/// place, so readers never see a partial file.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = path.parent_path() / ("." + path.filename().string() + ".tmp");
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorKind::invalid_argument, "cannot write " + tmp.string());
    os << content;
    if (!os.flush()) throw Error(ErrorKind::invalid_argument, "cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

struct Output {
  std::string name;    // file name inside the output directory
  std::string format;  // json, csv or svg
  std::string content;
};

inline std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

/// Default base point and anchor where the domain suggests one.
inline void default_anchor(const Domain& dom, RunConfig& cfg) {
  const int n = dom.dim();
  const auto join = [n](const Point& p) {
    std::ostringstream os;
    os.precision(17);
    for (int a = 0; a < n; ++a) os << (a ? "," : "") << p[a];
    return os.str();
  };
  Point e;
  e[n - 1] = 1.0;
  switch (dom.kind()) {
    case DomainKind::half_space:
      if (cfg.base.empty()) cfg.base = join(e);
      if (cfg.anchor.empty()) cfg.anchor = "inf:" + join(e);
      break;
    case DomainKind::ball:
      if (cfg.base.empty()) cfg.base = join(dom.center());
      if (cfg.anchor.empty()) cfg.anchor = "at:" + join(dom.center() + Point(dom.radius(), 0, 0));
      break;
    case DomainKind::punctured_space:
      if (cfg.base.empty()) cfg.base = join(dom.center() + Point(1, 0, 0));
      if (cfg.anchor.empty()) cfg.anchor = "inf:" + join(Point(1, 0, 0));
      break;
    default: break;
  }
  if (cfg.base.empty() || cfg.anchor.empty()) throw UsageError("--base and --anchor are required for this domain");
}

struct Context {
  RunConfig cfg;
  Domain dom;
  int stencil = 16;
  std::vector<Output> outputs;
  bool failed = false;
};

inline std::string csv_point(const Point& p, int dim) {
  std::ostringstream os;
  os.precision(17);
  for (int a = 0; a < dim; ++a) os << (a ? "," : "") << p[a];
  return os.str();
}

inline std::string coordinate_header(int dim) { return dim == 2 ? "x,y" : "x,y,z"; }

inline nlohmann::json envelope(const Context& ctx, nlohmann::json result) {
  return {{"config", to_json(ctx.cfg)}, {"result", std::move(result)}};
}

inline void run_geodesic(Context& ctx) {
  const int n = ctx.dom.dim();
  if (ctx.cfg.from.empty() || ctx.cfg.to.empty()) throw UsageError("geodesic needs --from and --to");
  const Point x = parse_point(ctx.cfg.from, n, "--from"), y = parse_point(ctx.cfg.to, n, "--to");
  const MetricGraph g = build_graph(ctx.dom, ctx.cfg.h, ctx.stencil);
  const QhGeodesic geo = qh_geodesic(g, x, y);
  std::ostringstream csv;
  csv.precision(17);
  csv << "index,id," << coordinate_header(n) << ",depth,k_arclength,euclidean_arclength\n";
  double k = 0.0, e = 0.0;
  const auto& vs = geo.path.vertices;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (i) {
      const std::size_t entry = g.adjacency().find(vs[i - 1], vs[i]);
      k += g.qh_weights()[entry];
      e += g.euclidean_lengths()[entry];
    }
    csv << i << ',' << vs[i] << ',' << csv_point(g.position(vs[i]), n) << ',' << g.depth(vs[i]) << ',' << k << ','
        << e << '\n';
  }
  nlohmann::json result{{"k", geo.k},
                        {"euclidean_length", geo.path.euclidean_length},
                        {"diameter", geo.path.diameter},
                        {"vertices", vs.size()},
                        {"snap_from", geo.snap_from},
                        {"snap_to", geo.snap_to},
                        {"h", g.spacing()}};
  try {
    result["closed_form"] = closed_form_qh(ctx.dom, x, y);
  } catch (const Error&) {
  }
  ctx.outputs.push_back({"geodesic.csv", "csv", csv.str()});
  ctx.outputs.push_back({"geodesic.json", "json", dump(envelope(ctx, result))});
  if (n == 2) {
    SvgOverlays ov;
    SvgPolyline pl;
    for (VertexId v : vs) pl.points.push_back(g.position(v));
    pl.label = "quasihyperbolic geodesic";
    ov.polylines.push_back(std::move(pl));
    ctx.outputs.push_back({"geodesic.svg", "svg", emit_svg(ctx.dom, ov)});
  }
}

inline nlohmann::json delta_json(const DeltaEstimate& d, int dim) {
  nlohmann::json w = nlohmann::json::array();
  for (std::size_t i : d.witness) w.push_back(to_json(d.sample[i], dim));
  return {{"delta", d.delta},
          {"quadruples", d.quadruples},
          {"mode", d.mode == DeltaEstimate::Mode::exhaustive ? "exhaustive" : "seeded_random"},
          {"h", d.h},
          {"seed", d.seed},
          {"sample_size", d.sample.size()},
          {"witness", w},
          {"epsilon", choose_epsilon(d.delta)}};
}

inline void run_delta(Context& ctx) {
  const MetricGraph g = build_graph(ctx.dom, ctx.cfg.h, ctx.stencil);
  const auto d = estimate_delta(g, ctx.cfg.samples, ctx.cfg.seed, ctx.cfg.quadruples);
  ctx.outputs.push_back({"delta.json", "json", dump(envelope(ctx, delta_json(d, ctx.dom.dim())))});
}

struct Field {
  BusemannField field;
  Point base;
  BoundaryAnchor anchor;
};

inline Field make_field(Context& ctx, const MetricGraph& g) {
  default_anchor(ctx.dom, ctx.cfg);
  const int n = ctx.dom.dim();
  const Point o = parse_point(ctx.cfg.base, n, "--base");
  const BoundaryAnchor anchor = parse_anchor(ctx.cfg.anchor, n);
  return {busemann_field(g, o, anchor, ctx.cfg.radius), o, anchor};
}

inline nlohmann::json field_json(const BusemannField& f, const MetricGraph& g) {
  double max_gap = 0.0;
  VertexId arg = no_vertex;
  for (VertexId v = 0; v < g.vertex_count(); ++v)
    if (std::isfinite(f.gap[v]) && f.gap[v] > max_gap) {
      max_gap = f.gap[v];
      arg = v;
    }
  nlohmann::json j{{"radius", f.radius}, {"snap_cells", f.snap_cells}, {"max_gap", max_gap}};
  if (arg != no_vertex) j["max_gap_at"] = to_json(g.position(arg), g.dim());
  j["anchor_near"] = to_json(g.position(f.anchor_near), g.dim());
  j["anchor_far"] = to_json(g.position(f.anchor_far), g.dim());
  return j;
}

inline void run_busemann(Context& ctx) {
  const MetricGraph g = build_graph(ctx.dom, ctx.cfg.h, ctx.stencil);
  const Field f = make_field(ctx, g);
  const int n = g.dim();
  std::ostringstream csv;
  csv.precision(17);
  csv << "id," << coordinate_header(n) << ",b,b_far,gap\n";
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (!std::isfinite(f.field.b[v])) continue;
    csv << v << ',' << csv_point(g.position(v), n) << ',' << f.field.b[v] << ',' << f.field.b_far[v] << ','
        << f.field.gap[v] << '\n';
  }
  ctx.outputs.push_back({"busemann.csv", "csv", csv.str()});
  ctx.outputs.push_back({"busemann.json", "json", dump(envelope(ctx, field_json(f.field, g)))});
}

inline double resolve_epsilon(Context& ctx, const MetricGraph& g, double* delta_out = nullptr) {
  const auto d = estimate_delta(g, ctx.cfg.samples, ctx.cfg.seed, ctx.cfg.quadruples);
  if (delta_out) *delta_out = d.delta;
  return ctx.cfg.epsilon ? *ctx.cfg.epsilon : choose_epsilon(d.delta);
}

inline void run_deform(Context& ctx) {
  const MetricGraph g = build_graph(ctx.dom, ctx.cfg.h, ctx.stencil);
  const Field f = make_field(ctx, g);
  double delta = 0.0;
  const double eps = resolve_epsilon(ctx, g, &delta);
  const DeformedGraph dg = deform(g, f.field, eps);
  const auto harnack = check_harnack(dg, delta, 500, ctx.cfg.seed);
  const int n = g.dim();
  std::ostringstream csv;
  csv.precision(17);
  csv << "id," << coordinate_header(n) << ",rho,d_eps,cell_mass\n";
  for (VertexId v = 0; v < g.vertex_count(); ++v)
    csv << v << ',' << csv_point(g.position(v), n) << ',' << dg.rho(v) << ',' << dg.d_eps(v) << ','
        << dg.cell_mass(v) << '\n';
  nlohmann::json result{{"epsilon", eps},
                        {"delta", delta},
                        {"d_eps_at_base", dg.d_eps(f.field.base)},
                        {"field", field_json(f.field, g)},
                        {"harnack",
                         {{"edges", harnack.edges},
                          {"edge_violations", harnack.edge_violations},
                          {"pairs", harnack.pairs},
                          {"pair_violations", harnack.pair_violations},
                          {"worst_excess", harnack.worst_excess}}}};
  ctx.outputs.push_back({"deform.csv", "csv", csv.str()});
  ctx.outputs.push_back({"deform.json", "json", dump(envelope(ctx, result))});
}

inline void run_modulus(Context& ctx) {
  if (ctx.cfg.set_e.empty() || ctx.cfg.set_f.empty()) throw UsageError("modulus needs --E and --F");
  const int n = ctx.dom.dim();
  const auto in_e = parse_region(ctx.cfg.set_e, n), in_f = parse_region(ctx.cfg.set_f, n);
  const MetricGraph g = build_graph(ctx.dom, ctx.cfg.h, ctx.stencil);
  auto E = select_vertices(g, in_e);
  auto F = select_vertices(g, in_f);
  ModulusSolution sol;
  nlohmann::json result;
  if (ctx.cfg.deformed) {
    const Field f = make_field(ctx, g);
    const double eps = resolve_epsilon(ctx, g);
    const DeformedGraph dg = deform(g, f.field, eps);
    sol = discrete_modulus(deformed_problem(dg, E, F, ctx.cfg.p));
    result["epsilon"] = eps;
    result["separation_ratio"] = separation_ratio(dg, E, F);
  } else {
    sol = discrete_modulus(euclidean_problem(g, E, F, ctx.cfg.p));
    result["separation_ratio"] = separation_ratio(g, E, F);
  }
  result["solution"] = to_json(sol);
  result["E_vertices"] = E.size();
  result["F_vertices"] = F.size();
  std::ostringstream csv;
  write_density_csv(g, sol, csv);
  ctx.outputs.push_back({"modulus.csv", "csv", csv.str()});
  ctx.outputs.push_back({"modulus.json", "json", dump(envelope(ctx, result))});
  if (n == 2) {
    SvgOverlays ov;
    for (std::size_t i = 0; i < std::min<std::size_t>(sol.paths.size(), 12); ++i) {
      SvgPolyline pl;
      for (VertexId v : sol.paths[i]) pl.points.push_back(g.position(v));
      pl.width = 1.0;
      pl.endpoint_markers = false;
      ov.polylines.push_back(std::move(pl));
    }
    ctx.outputs.push_back({"modulus.svg", "svg", emit_svg(ctx.dom, ov)});
  }
}

/// One property evaluated on one graph. `pairs` are shared between the coarse
/// and fine runs of a refinement check.
struct Samples {
  std::vector<PointPair> pairs, near, faltensatz;
  std::vector<LlcInstance> llc;
  std::vector<Triple> triples;
};

/// Samples drawn once on the coarse graph and shared with the fine run.
inline Samples draw_samples(const Context& ctx, const std::string& prop, const MetricGraph& g) {
  const auto& cfg = ctx.cfg;
  Samples s;
  s.pairs = sample_pairs(g, cfg.samples, cfg.seed);
  if (prop == "qh_sandwich") s.near = sample_near_pairs(g, 5 * cfg.samples, cfg.seed, 1.0);
  if (prop == "llc") s.llc = llc_instances(g, cfg.samples, cfg.seed);
  if (prop == "bhk314") s.triples = bhk314_triples(g, cfg.samples, cfg.seed);
  if (prop == "faltensatz") {
    const auto cs = make_cross_section(g, chord_cross_section(ctx.dom, 0.4 * ctx.dom.radius()));
    s.faltensatz = faltensatz_pairs(g, cs, cfg.samples, cfg.seed);
  }
  return s;
}

inline VerificationReport evaluate(Context& ctx, const std::string& prop, const MetricGraph& g, const Samples& smp,
                                   std::optional<double>& eps, std::optional<double>& delta,
                                   std::optional<double>& uniform_a) {
  const auto& pairs = smp.pairs;
  const auto& cfg = ctx.cfg;
  const auto need_eps = [&] {
    if (!eps || !delta) {
      double d = 0.0;
      eps = resolve_epsilon(ctx, g, &d);
      delta = d;
    }
  };
  if (prop == "gehring_hayman") return verify_gehring_hayman(g, pairs);
  if (prop == "separation") return verify_separation(g, pairs, cfg.competitors, cfg.seed);
  if (prop == "pommerenke") return verify_pommerenke(g, pairs);
  if (prop == "uniformity") return verify_uniformity(g, pairs);
  if (prop == "llc") return verify_llc(g, smp.llc);
  if (prop == "bhk_uniform_bounds") {
    if (!uniform_a) uniform_a = verify_uniformity(g, pairs).constants.at("A");
    return verify_bhk_uniform_bounds(g, pairs, uniform_a);
  }
  if (prop == "bhk314") return verify_bhk314(g, smp.triples);
  if (prop == "qh_sandwich") return verify_qh_sandwich(g, smp.near);
  if (prop == "faltensatz") {
    const auto cs = make_cross_section(g, chord_cross_section(ctx.dom, 0.4 * ctx.dom.radius()));
    const auto a = verify_faltensatz(g, cs, smp.faltensatz);
    return faltensatz_composition(a, verify_gehring_hayman(g, pairs),
                                  verify_separation(g, pairs, cfg.competitors, cfg.seed), verify_pommerenke(g, pairs));
  }
  if (prop == "boundary_qs") {
    need_eps();
    if (!uniform_a) uniform_a = verify_uniformity(g, pairs).constants.at("A");
    const Field f = make_field(ctx, g);
    return verify_boundary_qs(g, f.field, *eps, cfg.triples, cfg.seed, *uniform_a);
  }
  if (prop == "deformation_bounds") {
    need_eps();
    const Field f = make_field(ctx, g);
    const DeformedGraph dg = deform(g, f.field, *eps);
    return verify_deformation_bounds(g, dg, pairs, *delta, cfg.seed);
  }
  if (prop == "rough_starlike") {
    const auto anchors = sample_boundary(ctx.dom, 8, cfg.seed, {.face_margin = 0.2, .region = {}});
    return estimate_rough_starlike(g, anchors, cfg.samples, cfg.seed);
  }
  throw UsageError("unknown property '" + prop + "'");
}

inline VerificationReport verify_property(Context& ctx, const std::string& prop) {
  const auto& cfg = ctx.cfg;
  if (prop == "faltensatz" && (ctx.dom.kind() != DomainKind::ball || ctx.dom.dim() != 2))
    throw UsageError("faltensatz runs on a disk with a chord cross-section");
  const MetricGraph coarse = build_graph(ctx.dom, cfg.h, ctx.stencil);
  const Samples samples = draw_samples(ctx, prop, coarse);
  std::optional<double> eps = cfg.epsilon, delta, uniform_a;
  VerificationReport r = evaluate(ctx, prop, coarse, samples, eps, delta, uniform_a);
  if (cfg.refine && prop != "rough_starlike") {
    const MetricGraph fine = build_graph(ctx.dom, 0.5 * cfg.h, ctx.stencil);
    std::optional<double> fine_a = uniform_a;
    r = refine(r, evaluate(ctx, prop, fine, samples, eps, delta, fine_a), cfg.refine_tolerance);
  }
  if (prop == "uniformity" && ctx.dom.dim() == 2) {
    const auto sweep = verify_uniformity_scales(ctx.dom, {}, cfg.seed);
    r.details["scale_sweep"] = to_json(sweep, 2);
    r.constants["scale_growth"] = sweep.constants.at("growth");
    if (r.pass && !sweep.pass) r.set(false, "blow-up");
  }
  if (eps) r.tolerances["epsilon"] = *eps;
  if (delta) r.tolerances["delta_hat"] = *delta;
  r.property = prop;
  r.config = to_json(cfg);
  r.config["property"] = prop;
  return r;
}

inline std::string witness_svg(const Context& ctx, const VerificationReport& r) {
  SvgOverlays ov;
  ov.title = r.property + ": " + r.status;
  const auto& pts = r.witness.points;
  if (pts.size() >= 2) {
    try {
      const MetricGraph g = build_graph(ctx.dom, ctx.cfg.h, ctx.stencil);
      const VertexId a = g.snap(pts[0]), b = g.snap(pts[1]);
      if (g.component(a) == g.component(b)) {
        SvgPolyline pl;
        for (VertexId v : shortest_path(g, a, b, g.qh_weights()).vertices) pl.points.push_back(g.position(v));
        pl.label = "witness geodesic";
        ov.polylines.push_back(std::move(pl));
      }
    } catch (const Error&) {
    }
  }
  for (std::size_t i = 0; i < pts.size(); ++i) ov.markers.push_back({pts[i], "#d62728", "w" + std::to_string(i)});
  return emit_svg(ctx.dom, ov);
}

inline void run_verify(Context& ctx) {
  const auto r = verify_property(ctx, ctx.cfg.property);
  const int n = ctx.dom.dim();
  ctx.outputs.push_back({"verify_" + r.property + ".json", "json", dump(to_json(r, n))});
  if (n == 2) ctx.outputs.push_back({"verify_" + r.property + ".svg", "svg", witness_svg(ctx, r)});
  ctx.failed = !(r.pass || r.status == "report-only");
}

/// Every property applicable to the domain, in one document.
inline void run_report(Context& ctx) {
  nlohmann::json reports = nlohmann::json::object();
  bool pass = true;
  bool has_field = true;
  try {
    default_anchor(ctx.dom, ctx.cfg);
  } catch (const UsageError&) {
    has_field = false;
  }
  for (const auto& prop : properties) {
    if (prop == "faltensatz" && (ctx.dom.kind() != DomainKind::ball || ctx.dom.dim() != 2)) continue;
    if ((prop == "boundary_qs" || prop == "deformation_bounds") && !has_field) continue;
    if (prop == "boundary_qs" && (ctx.dom.bounded() || ctx.cfg.anchor.rfind("inf:", 0) != 0)) continue;
    const auto r = verify_property(ctx, prop);
    reports[prop] = to_json(r, ctx.dom.dim());
    pass = pass && (r.pass || r.status == "report-only");
  }
  nlohmann::json doc{{"config", to_json(ctx.cfg)}, {"reports", reports}, {"pass", pass}};
  ctx.outputs.push_back({"report.json", "json", dump(doc)});
  ctx.failed = !pass;
}

/// CLI11 reader for JSON config files: top-level keys map to long flag names.
class JsonConfig : public CLI::Config {
public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return {}; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json j;
    try {
      input >> j;
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      CLI::ConfigItem item;
      item.name = key;
      const auto scalar = [](const nlohmann::json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return std::string(v.get<bool>() ? "true" : "false");
        return v.dump();
      };
      if (value.is_array())
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      else
        item.inputs.push_back(scalar(value));
      items.push_back(std::move(item));
    }
    return items;
  }
};

}  // namespace detail

/// Entry point shared by the qhl tool and tests. Exit codes: 0 success,
/// 1 verification failure, 2 usage or input error.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  RunConfig cfg;
  CLI::App app{"Quasihyperbolic geometry toolkit: geodesics, Gromov hyperbolicity, deformations, moduli and "
               "uniformity verifiers on discretized domains.",
               "qhl"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_version_flag("--version", std::string(version));
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.config_formatter(std::make_shared<detail::JsonConfig>());
  app.set_config("--config", "", "JSON file of flag defaults; flags given on the command line win");

  double eps = 0.0;
  app.add_option("--domain", cfg.domain_path, "Domain spec JSON")->required()->check(CLI::ExistingFile);
  app.add_option("--h", cfg.h, "Grid spacing")->check(CLI::PositiveNumber);
  app.add_option("--stencil", cfg.stencil, "Neighbour stencil (16 in 2-D, 26 in 3-D)")->check(CLI::IsMember({16, 26}));
  app.add_option("--seed", cfg.seed, "Random seed");
  auto* eps_opt = app.add_option("--eps", eps, "Deformation parameter; default from the estimated delta")
                      ->check(CLI::PositiveNumber);
  app.add_option("--samples", cfg.samples, "Pairs, trials or sample points per run")->check(CLI::Range(4, 100000));
  app.add_option("--quadruples", cfg.quadruples, "Four-point quadruples for delta")->check(CLI::Range(1, 100000000));
  app.add_option("--triples", cfg.triples, "Boundary triples for quasisymmetry")->check(CLI::Range(30, 1000000));
  app.add_option("--competitors", cfg.competitors, "Detour competitors per pair")->check(CLI::Range(0, 100));
  app.add_option("--from", cfg.from, "Geodesic start, comma separated");
  app.add_option("--to", cfg.to, "Geodesic end, comma separated");
  app.add_option("--base", cfg.base, "Busemann base point");
  app.add_option("--anchor", cfg.anchor, "Boundary anchor: inf:<direction> or at:<point>");
  app.add_option("--radius", cfg.radius, "Busemann anchor radius R")->check(CLI::PositiveNumber);
  app.add_option("--E", cfg.set_e, "Modulus set E: ball:c,r | outside:c,r | box:lo,hi");
  app.add_option("--F", cfg.set_f, "Modulus set F");
  app.add_option("--p", cfg.p, "Modulus exponent")->check(CLI::Range(1.0 + 1e-9, 64.0));
  app.add_flag("--deformed", cfg.deformed, "Use the deformed length and measure");
  app.add_flag("!--no-refine", cfg.refine, "Skip the h/2 refinement run");
  app.add_option("--refine-tolerance", cfg.refine_tolerance, "Relative drift allowed between h and h/2")
      ->check(CLI::Range(0.0, 10.0));
  app.add_option("--out", cfg.out, "Output directory, or - for standard output");
  app.add_option("--format", cfg.formats, "Formats to write: json, csv, svg")
      ->check(CLI::IsMember({"json", "csv", "svg"}));

  app.add_subcommand("geodesic", "Quasihyperbolic geodesic between two points (CSV path)");
  app.add_subcommand("delta", "Four-point Gromov delta estimate");
  app.add_subcommand("busemann", "Busemann field toward a boundary anchor");
  app.add_subcommand("deform", "Conformal deformation by the Busemann density");
  app.add_subcommand("modulus", "Discrete p-modulus of the curve family joining E and F");
  auto* verify = app.add_subcommand("verify", "Run one verifier with refinement");
  verify->add_option("property", cfg.property, "Property to verify")->required()->check(CLI::IsMember(properties));
  app.add_subcommand("report", "Run every applicable verifier");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << version << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }
  if (eps_opt->count() > 0) cfg.epsilon = eps;
  cfg.command = app.get_subcommands().front()->get_name();

  detail::Context ctx;
  try {
    std::ifstream is(cfg.domain_path);
    nlohmann::json spec;
    try {
      is >> spec;
    } catch (const nlohmann::json::exception& e) {
      throw UsageError(std::string("domain file is not valid JSON: ") + e.what());
    }
    ctx.dom = make_domain(spec);
    cfg.domain = ctx.dom.description();
    ctx.stencil = cfg.stencil ? cfg.stencil : (ctx.dom.dim() == 2 ? 16 : 26);
    cfg.stencil = ctx.stencil;
    if ((ctx.dom.dim() == 2) != (ctx.stencil == 16)) throw UsageError("stencil does not match dimension");
    if (ctx.dom.dim() != 2 && std::find(cfg.formats.begin(), cfg.formats.end(), "svg") != cfg.formats.end())
      throw UsageError("svg is 2-D only");
    ctx.cfg = cfg;

    if (cfg.command == "geodesic") detail::run_geodesic(ctx);
    else if (cfg.command == "delta") detail::run_delta(ctx);
    else if (cfg.command == "busemann") detail::run_busemann(ctx);
    else if (cfg.command == "deform") detail::run_deform(ctx);
    else if (cfg.command == "modulus") detail::run_modulus(ctx);
    else if (cfg.command == "verify") detail::run_verify(ctx);
    else detail::run_report(ctx);

    std::vector<std::string> formats = cfg.formats;
    if (cfg.out == "-") {
      // Standard output carries one document: the CSV path for geodesics,
      // otherwise the JSON report, unless --format picks another.
      std::string want = formats.empty() ? (cfg.command == "geodesic" ? "csv" : "json") : formats.front();
      for (const auto& o : ctx.outputs)
        if (o.format == want) {
          out << o.content;
          break;
        }
    } else {
      std::filesystem::create_directories(cfg.out);
      for (const auto& o : ctx.outputs)
        if (formats.empty() || std::find(formats.begin(), formats.end(), o.format) != formats.end())
          detail::write_atomic(std::filesystem::path(cfg.out) / o.name, o.content);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return ctx.failed ? 1 : 0;
}

}  // namespace qhl::cli
