#pragma once

// CSV, JSON and SVG writers.  Every file carries the code version and the config hash.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracreg/core.hpp"
#include "fracreg/diagnostics.hpp"

namespace fracreg {

using Json = nlohmann::ordered_json;

struct Provenance {
  std::string version = kVersion;
  std::string config_hash;
  std::uint64_t seed = 0;
};

inline std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Finite numbers as they are, everything else as null.
inline Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json num_array(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

inline Json to_json(const Provenance& p) {
  return Json{{"version", p.version}, {"config_hash", p.config_hash}, {"seed", p.seed}};
}

inline Json to_json(const CheckResult& c) {
  return Json{{"name", c.name}, {"pass", c.pass}, {"value", num(c.value)}, {"tolerance", num(c.tolerance)}};
}

inline Json to_json(const SolveStats& s) {
  return Json{{"method", s.method},
              {"iterations", s.iterations},
              {"evaluations", s.evaluations},
              {"warm_start_iterations", s.warm_start_iterations},
              {"residual", num(s.residual)},
              {"threshold", num(s.threshold)},
              {"converged", s.converged}};
}

inline Json to_json(const OscillationTrace& t) {
  return Json{{"radii", num_array(t.radii)},       {"osc", num_array(t.osc)},  {"alpha", num(t.alpha)},
              {"C", num(t.C)},                     {"residual", num(t.residual)}, {"alpha_plain", num(t.alpha_plain)},
              {"C_plain", num(t.C_plain)},         {"monotone", t.monotone}};
}

inline Json to_json(const DiagnosticsReport& r, const Provenance& prov) {
  Json j;
  j["domain"] = r.domain;
  j["p"] = num(r.p);
  j["s"] = num(r.s);
  j["grid"] = {{"h", num(r.h)}, {"n", r.n}};
  j["sup_quotient"] = num(r.sup_quotient);
  Json anchors = Json::array();
  for (const auto& a : r.anchors) {
    Json e{{"x1", num_array(a.x1)}, {"trace", to_json(a.trace)}};
    if (!a.note.empty()) e["note"] = a.note;
    anchors.push_back(std::move(e));
  }
  j["anchors"] = std::move(anchors);
  Json ex = Json::array();
  for (const auto& e : r.excess)
    ex.push_back({{"k", num(e.k)}, {"R", num(e.R)}, {"x0", num_array(e.x0)}, {"value", num(e.value)}, {"nodes", e.nodes}});
  j["excess"] = std::move(ex);
  Json tails = Json::array();
  for (const auto& t : r.tails)
    tails.push_back({{"q", num(t.q)}, {"R", num(t.R)}, {"x0", num_array(t.x0)}, {"value", num(t.value)}});
  j["tails"] = std::move(tails);
  Json checks = Json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  j["checks"] = std::move(checks);
  j["regime"] = r.regime;
  j["solver"] = to_json(r.stats);
  j["version"] = prov.version;
  j["config_hash"] = prov.config_hash;
  j["seed"] = prov.seed;
  return j;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

inline void write_json(const std::string& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

/// A comment line with the provenance, the header row, then one row per record.
inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows, const Provenance& prov) {
  std::string s = "# " + prov.version + " config_hash=" + prov.config_hash + " seed=" + std::to_string(prov.seed) + "\n";
  for (std::size_t k = 0; k < header.size(); ++k) s += (k ? "," : "") + header[k];
  s += "\n";
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) s += (k ? "," : "") + g17(row[k]);
    s += "\n";
  }
  write_text(path, s);
}

/// Log-log plot of the oscillation traces.
inline std::string oscillation_svg(const DiagnosticsReport& r, const Provenance& prov) {
  const double W = 640, H = 480, L = 70, R = 20, T = 40, B = 60;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& a : r.anchors)
    for (std::size_t k = 0; k < a.trace.radii.size(); ++k) {
      if (!(a.trace.osc[k] > 0.0)) continue;
      xmin = std::min(xmin, std::log10(a.trace.radii[k]));
      xmax = std::max(xmax, std::log10(a.trace.radii[k]));
      ymin = std::min(ymin, std::log10(a.trace.osc[k]));
      ymax = std::max(ymax, std::log10(a.trace.osc[k]));
    }
  if (!(xmax >= xmin)) xmin = -1, xmax = 0, ymin = -1, ymax = 0;
  xmin = std::floor(xmin), xmax = std::ceil(xmax), ymin = std::floor(ymin), ymax = std::ceil(ymax);
  if (xmax == xmin) xmax += 1;
  if (ymax == ymin) ymax += 1;
  auto X = [&](double lx) { return L + (lx - xmin) / (xmax - xmin) * (W - L - R); };
  auto Y = [&](double ly) { return H - B - (ly - ymin) / (ymax - ymin) * (H - T - B); };
  char buf[256];
  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  std::snprintf(buf, sizeof buf, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" viewBox=\"0 0 %g %g\">\n",
                W, H, W, H);
  s += buf;
  s += "<!-- " + prov.version + " config_hash=" + prov.config_hash + " seed=" + std::to_string(prov.seed) + " -->\n";
  s += "<title>oscillation of u/d^s, " + r.domain + "</title>\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf, "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n", L, T,
                W - L - R, H - T - B);
  s += buf;
  for (double lx = xmin; lx <= xmax + 1e-9; lx += 1.0) {
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" text-anchor=\"middle\">1e%d</text>\n", X(lx), H - B + 18,
                  static_cast<int>(lx));
    s += buf;
  }
  for (double ly = ymin; ly <= ymax + 1e-9; ly += 1.0) {
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" text-anchor=\"end\">1e%d</text>\n", L - 6,
                  Y(ly) + 4, static_cast<int>(ly));
    s += buf;
  }
  std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" font-size=\"13\" text-anchor=\"middle\">radius</text>\n",
                0.5 * (L + W - R), H - 18);
  s += buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"16\" y=\"%.2f\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 %.2f)\">osc</text>\n",
                0.5 * (T + H - B), 0.5 * (T + H - B));
  s += buf;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  int idx = 0;
  for (const auto& a : r.anchors) {
    const char* col = colors[idx % 6];
    std::string pts;
    for (std::size_t k = 0; k < a.trace.radii.size(); ++k) {
      if (!(a.trace.osc[k] > 0.0)) continue;
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", X(std::log10(a.trace.radii[k])), Y(std::log10(a.trace.osc[k])));
      pts += buf;
    }
    if (!pts.empty()) s += "<polyline fill=\"none\" stroke=\"" + std::string(col) + "\" points=\"" + pts + "\"/>\n";
    std::string label = "x1 = (";
    for (std::size_t k = 0; k < a.x1.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%s%.4g", k ? ", " : "", a.x1[k]);
      label += buf;
    }
    std::snprintf(buf, sizeof buf, "), alpha = %.4g", a.trace.alpha);
    label += buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" fill=\"%s\">", L + 10, T + 16 + 15.0 * idx, col);
    s += buf + label + "</text>\n";
    ++idx;
  }
  s += "</svg>\n";
  return s;
}

}  // namespace fracreg
