// Human-readable model tables and the coefficient plot.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "botdyn/regression.hpp"

namespace botdyn {

namespace detail {

inline std::string fixed3(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

inline std::string pad(std::string s, std::size_t width, bool left = false) {
  if (s.size() >= width) return s;
  return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
}

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace detail

inline std::string format_model_table(const ModelFit& m) {
  std::ostringstream out;
  out << "Model: " << m.name << " (response " << m.raw.response << ", n = " << m.raw.n << ")\n";
  out << format_model_header(m.raw) << "\n";
  out << detail::pad("term", 18, true) << detail::pad("coef", 10) << detail::pad("std.coef", 10)
      << detail::pad("SE", 10) << detail::pad("t", 10) << detail::pad("p", 10) << "\n";
  for (const auto& t : m.raw.terms) {
    out << detail::pad(t.name, 18, true) << detail::pad(detail::fixed3(t.coefficient), 10)
        << detail::pad(detail::fixed3(t.std_coefficient), 10)
        << detail::pad(detail::fixed3(t.std_error), 10) << detail::pad(detail::fixed3(t.t_value), 10)
        << detail::pad(t.p_value < 0.001 ? "<0.001" : detail::fixed3(t.p_value), 10) << "\n";
  }
  return out.str();
}

inline std::string format_report(const ModelRun& run) {
  if (run.models.empty()) throw ValidationError("report: no fitted models");
  std::ostringstream out;
  for (std::size_t i = 0; i < run.models.size(); ++i) {
    if (i) out << "\n";
    out << format_model_table(run.models[i]);
  }
  if (run.dropped_error_rows)
    out << "\n" << run.dropped_error_rows << " sequence(s) dropped after failed reconstruction\n";
  return out.str();
}

/// Standardized estimates with confidence whiskers, one panel per model.
/// Each predictor contributes one <line class="ci"> and one
/// <circle class="estimate">.
inline std::string coefficient_plot_svg(const ModelRun& run, double level = 0.95) {
  if (run.models.empty()) throw ValidationError("plot: no fitted models");
  constexpr double panel_w = 360, row_h = 36, margin_l = 140, top = 40, pad_r = 20;
  std::size_t max_terms = 0;
  for (const auto& m : run.models) max_terms = std::max(max_terms, m.standardized.terms.size() - 1);
  const double panel_h = top + row_h * static_cast<double>(max_terms) + 40;
  const double width = margin_l + panel_w * static_cast<double>(run.models.size()) + pad_r;

  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
      << num(panel_h) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  for (std::size_t mi = 0; mi < run.models.size(); ++mi) {
    const auto& fit = run.models[mi].standardized;
    const auto ci = confidence_intervals(fit, level);
    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 1; i < fit.terms.size(); ++i) {
      if (std::isfinite(ci[i].lo)) lo = std::min(lo, ci[i].lo);
      if (std::isfinite(ci[i].hi)) hi = std::max(hi, ci[i].hi);
    }
    if (hi - lo < 1e-12) hi = lo + 1.0;
    const double span = hi - lo;
    lo -= 0.05 * span;
    hi += 0.05 * span;
    const double x0 = margin_l + panel_w * static_cast<double>(mi);
    const double plot_w = panel_w - 30;
    auto sx = [&](double v) { return x0 + (std::clamp(v, lo, hi) - lo) / (hi - lo) * plot_w; };

    svg << "  <g class=\"panel\" id=\"" << detail::xml_escape(run.models[mi].name) << "\">\n";
    svg << "    <text x=\"" << num(x0) << "\" y=\"20\" font-weight=\"bold\">"
        << static_cast<char>('a' + mi) << ") " << detail::xml_escape(run.models[mi].name) << "</text>\n";
    svg << "    <line class=\"zero\" x1=\"" << num(sx(0.0)) << "\" y1=\"" << num(top - 10)
        << "\" x2=\"" << num(sx(0.0)) << "\" y2=\"" << num(panel_h - 30)
        << "\" stroke=\"#999\" stroke-dasharray=\"4,3\"/>\n";
    for (std::size_t i = 1; i < fit.terms.size(); ++i) {
      const double y = top + row_h * (static_cast<double>(i) - 0.5);
      const auto& t = fit.terms[i];
      if (mi == 0)
        svg << "    <text x=\"" << num(margin_l - 10) << "\" y=\"" << num(y + 4)
            << "\" text-anchor=\"end\">" << detail::xml_escape(t.name) << "</text>\n";
      svg << "    <line class=\"ci\" x1=\"" << num(sx(ci[i].lo)) << "\" y1=\"" << num(y) << "\" x2=\""
          << num(sx(ci[i].hi)) << "\" y2=\"" << num(y) << "\" stroke=\"#333\" stroke-width=\"2\"/>\n";
      svg << "    <circle class=\"estimate\" cx=\"" << num(sx(t.coefficient)) << "\" cy=\"" << num(y)
          << "\" r=\"4\" fill=\"#1f4e79\"/>\n";
    }
    svg << "    <text x=\"" << num(x0) << "\" y=\"" << num(panel_h - 10) << "\">" << num(lo)
        << "</text>\n";
    svg << "    <text x=\"" << num(x0 + plot_w) << "\" y=\"" << num(panel_h - 10)
        << "\" text-anchor=\"end\">" << num(hi) << "</text>\n";
    svg << "  </g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace botdyn
