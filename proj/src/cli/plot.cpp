#include "emi/cli/plot.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

namespace emi::cli {

namespace {

constexpr double kWidth = 720;
constexpr double kHeight = 440;
constexpr double kLeft = 70;
constexpr double kRight = 70;
constexpr double kTop = 40;
constexpr double kBottom = 60;

constexpr const char* kPalette[] = {"#1b6ca8", "#d1495b", "#2a9d8f", "#e9a23b",
                                    "#6a4c93", "#3d405b", "#8d6e63", "#00798c"};

std::string f2(double v) {
  auto s = fmt::format("{:.2f}", v);
  return s == "-0.00" ? "0.00" : s;
}

std::string tick_label(double v, double step) {
  const int digits = step >= 1 ? 0 : static_cast<int>(std::ceil(-std::log10(step) - 1e-9));
  auto s = fmt::format("{:.{}f}", v, digits);
  if (!s.empty() && s[0] == '-' && std::stod(s) == 0.0) s.erase(0, 1);
  return s;
}

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;

  static Range of(const std::vector<double>& v) {
    Range r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const double x : v) {
      r.lo = std::min(r.lo, x);
      r.hi = std::max(r.hi, x);
    }
    if (v.empty()) return Range{};
    if (r.hi - r.lo < 1e-12) {
      const double pad = std::max(std::abs(r.lo) * 0.1, 0.5);
      r.lo -= pad;
      r.hi += pad;
    }
    return r;
  }

  [[nodiscard]] Range padded(double share = 0.05) const {
    const double d = (hi - lo) * share;
    return {lo - d, hi + d};
  }
};

struct Axis {
  Range range;
  double p0 = 0.0;  // pixel at range.lo
  double p1 = 1.0;  // pixel at range.hi

  [[nodiscard]] double operator()(double v) const {
    return p0 + (v - range.lo) / (range.hi - range.lo) * (p1 - p0);
  }
};

/// Axis whose range is widened to the outermost ticks.
Axis make_axis(Range data, double p0, double p1, std::vector<double>& ticks) {
  ticks = nice_ticks(data.lo, data.hi);
  data.lo = std::min(data.lo, ticks.front());
  data.hi = std::max(data.hi, ticks.back());
  return Axis{data, p0, p1};
}

double tick_step(const std::vector<double>& ticks) { return ticks.size() > 1 ? ticks[1] - ticks[0] : 1.0; }

void header(std::ostringstream& out, const std::string& title, const std::string& provenance) {
  out << R"(<?xml version="1.0" encoding="UTF-8"?>)" << "\n";
  out << "<!-- " << escape(provenance) << " -->\n";
  out << fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}" font-family="Helvetica, Arial, sans-serif" font-size="12">)",
                     kWidth, kHeight, kWidth, kHeight)
      << "\n";
  out << fmt::format(R"(<rect x="0" y="0" width="{}" height="{}" fill="#ffffff"/>)", kWidth, kHeight) << "\n";
  out << fmt::format(R"(<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>)", f2(kWidth / 2),
                     escape(title))
      << "\n";
}

void frame(std::ostringstream& out) {
  out << fmt::format(R"(<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#333333"/>)", f2(kLeft),
                     f2(kTop), f2(kWidth - kLeft - kRight), f2(kHeight - kTop - kBottom))
      << "\n";
}

void x_axis(std::ostringstream& out, const Axis& ax, const std::vector<double>& ticks, const std::string& label,
            bool integer) {
  const double y = kHeight - kBottom;
  for (const double t : ticks) {
    const double x = ax(t);
    out << fmt::format(R"(<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="#333333"/>)", f2(x), f2(y),
                       f2(y + 5))
        << "\n";
    out << fmt::format(R"(<text x="{}" y="{}" text-anchor="middle">{}</text>)", f2(x), f2(y + 18),
                       integer ? fmt::format("{:.0f}", t) : tick_label(t, tick_step(ticks)))
        << "\n";
  }
  out << fmt::format(R"(<text x="{}" y="{}" text-anchor="middle">{}</text>)",
                     f2(kLeft + (kWidth - kLeft - kRight) / 2), f2(kHeight - 18), escape(label))
      << "\n";
}

void y_axis(std::ostringstream& out, const Axis& ax, const std::vector<double>& ticks, const std::string& label,
            bool right, const std::string& color) {
  const double x = right ? kWidth - kRight : kLeft;
  const double dir = right ? 1.0 : -1.0;
  for (const double t : ticks) {
    const double y = ax(t);
    out << fmt::format(R"(<line x1="{0}" y1="{2}" x2="{1}" y2="{2}" stroke="{3}"/>)", f2(x), f2(x + 5 * dir),
                       f2(y), color)
        << "\n";
    out << fmt::format(R"(<text x="{}" y="{}" text-anchor="{}" fill="{}">{}</text>)", f2(x + 8 * dir),
                       f2(y + 4), right ? "start" : "end", color, tick_label(t, tick_step(ticks)))
        << "\n";
  }
  const double lx = right ? kWidth - 18 : 18;
  const double ly = kTop + (kHeight - kTop - kBottom) / 2;
  out << fmt::format(R"svg(<text x="{0}" y="{1}" text-anchor="middle" fill="{3}" transform="rotate(-90 {0} {1})">{2}</text>)svg",
                     f2(lx), f2(ly), escape(label), color)
      << "\n";
}

std::string polyline(const std::vector<std::pair<double, double>>& pts) {
  std::string s;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) s += ' ';
    s += f2(pts[i].first) + "," + f2(pts[i].second);
  }
  return s;
}

}  // namespace

double LineFit::band(double x, double level) const {
  if (n < 3) return 0.0;
  const boost::math::students_t dist(static_cast<double>(n - 2));
  const double t = boost::math::quantile(boost::math::complement(dist, (1.0 - level) / 2.0));
  const double d = x - x_mean;
  return t * sigma * std::sqrt(1.0 / static_cast<double>(n) + d * d / sxx);
}

std::optional<LineFit> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 3 || y.size() != n) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 1e-15 * std::max(1.0, mx * mx)) return std::nullopt;
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.x_mean = mx;
  f.sxx = sxx;
  f.n = n;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.at(x[i]);
    rss += r * r;
  }
  f.sigma = std::sqrt(rss / static_cast<double>(n - 2));
  return f;
}

std::vector<double> nice_ticks(double lo, double hi, int target) {
  if (!(hi > lo)) hi = lo + 1.0;
  const double raw = (hi - lo) / std::max(1, target);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (const double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  const double start = std::floor(lo / step + 1e-9) * step;
  std::vector<double> ticks;
  for (int i = 0;; ++i) {
    const double t = start + i * step;
    // Snap to the step grid so printed labels never show rounding residue.
    ticks.push_back(std::round(t / step) * step);
    if (t >= hi - 1e-9 * step) break;
  }
  return ticks;
}

std::string trend_svg(const std::string& country, const std::vector<panel::PanelRow>& rows,
                      const std::string& indicator, const std::vector<PlotEvent>& events,
                      const std::string& provenance) {
  std::vector<double> years, emi, lo, hi, ind_years, ind;
  for (const auto& r : rows) {
    const auto e = r.get("emi");
    if (e) {
      years.push_back(r.year);
      emi.push_back(*e);
      lo.push_back(r.get("emi_ci_low").value_or(*e));
      hi.push_back(r.get("emi_ci_high").value_or(*e));
    }
    if (const auto v = r.get(indicator)) {
      ind_years.push_back(r.year);
      ind.push_back(*v);
    }
  }
  std::vector<double> all_years = years;
  all_years.insert(all_years.end(), ind_years.begin(), ind_years.end());
  for (const auto& ev : events) {
    if (ev.country == country) all_years.push_back(ev.year);
  }
  std::vector<double> emi_span = lo;
  emi_span.insert(emi_span.end(), hi.begin(), hi.end());

  std::vector<double> xt, yt, rt;
  const Axis xa = make_axis(Range::of(all_years), kLeft, kWidth - kRight, xt);
  const Axis ya = make_axis(Range::of(emi_span).padded(), kHeight - kBottom, kTop, yt);
  const Axis ra = make_axis(Range::of(ind).padded(), kHeight - kBottom, kTop, rt);
  const std::string emi_color = kPalette[0];
  const std::string ind_color = kPalette[1];

  std::ostringstream out;
  header(out, country + ": EMI and " + indicator, provenance);
  frame(out);
  x_axis(out, xa, xt, "Year", true);
  y_axis(out, ya, yt, "EMI", false, emi_color);
  y_axis(out, ra, rt, indicator, true, ind_color);

  if (!years.empty()) {
    std::vector<std::pair<double, double>> band;
    for (std::size_t i = 0; i < years.size(); ++i) band.emplace_back(xa(years[i]), ya(hi[i]));
    for (std::size_t i = years.size(); i-- > 0;) band.emplace_back(xa(years[i]), ya(lo[i]));
    out << fmt::format(R"(<polygon points="{}" fill="{}" fill-opacity="0.2" stroke="none"/>)", polyline(band),
                       emi_color)
        << "\n";
    std::vector<std::pair<double, double>> line;
    for (std::size_t i = 0; i < years.size(); ++i) line.emplace_back(xa(years[i]), ya(emi[i]));
    out << fmt::format(R"(<polyline points="{}" fill="none" stroke="{}" stroke-width="2"/>)", polyline(line),
                       emi_color)
        << "\n";
  }
  if (!ind.empty()) {
    std::vector<std::pair<double, double>> line;
    for (std::size_t i = 0; i < ind.size(); ++i) line.emplace_back(xa(ind_years[i]), ra(ind[i]));
    out << fmt::format(R"(<polyline points="{}" fill="none" stroke="{}" stroke-width="2"/>)", polyline(line),
                       ind_color)
        << "\n";
  }
  for (const auto& ev : events) {
    if (ev.country != country) continue;
    const double x = xa(ev.year);
    out << fmt::format(R"(<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="#555555" stroke-dasharray="5,4"/>)",
                       f2(x), f2(kTop), f2(kHeight - kBottom))
        << "\n";
    out << fmt::format(R"(<text x="{}" y="{}" font-size="10" fill="#555555">{}</text>)", f2(x + 3), f2(kTop + 12),
                       escape(ev.label))
        << "\n";
  }
  out << fmt::format(R"(<text x="{}" y="{}" fill="{}">EMI (95% CI)</text>)", f2(kLeft + 8), f2(kTop + 16), emi_color)
      << "\n";
  out << fmt::format(R"(<text x="{}" y="{}" fill="{}">{}</text>)", f2(kLeft + 8), f2(kTop + 30), ind_color,
                     escape(indicator))
      << "\n";
  out << "</svg>\n";
  return out.str();
}

std::string scatter_svg(const std::vector<panel::PanelRow>& rows, const std::string& indicator,
                        const std::string& provenance) {
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_country;
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    const auto e = r.get("emi");
    const auto v = r.get(indicator);
    if (!e || !v) continue;
    by_country[r.country].first.push_back(*e);
    by_country[r.country].second.push_back(*v);
    xs.push_back(*e);
    ys.push_back(*v);
  }
  std::vector<double> xt, yt;
  const Axis xa = make_axis(Range::of(xs).padded(), kLeft, kWidth - kRight, xt);
  const Axis ya = make_axis(Range::of(ys).padded(), kHeight - kBottom, kTop, yt);

  std::ostringstream out;
  header(out, "EMI and " + indicator + " by country-year", provenance);
  frame(out);
  x_axis(out, xa, xt, "EMI", false);
  y_axis(out, ya, yt, indicator, false, "#333333");

  const auto overall = fit_line(xs, ys);
  if (overall) {
    constexpr int kSteps = 40;
    std::vector<std::pair<double, double>> upper, lower, line;
    const double a = xa.range.lo, b = xa.range.hi;
    for (int i = 0; i <= kSteps; ++i) {
      const double x = a + (b - a) * i / kSteps;
      const double y = overall->at(x);
      const double h = overall->band(x);
      upper.emplace_back(xa(x), ya(std::clamp(y + h, ya.range.lo, ya.range.hi)));
      lower.emplace_back(xa(x), ya(std::clamp(y - h, ya.range.lo, ya.range.hi)));
    }
    std::vector<std::pair<double, double>> band = upper;
    band.insert(band.end(), lower.rbegin(), lower.rend());
    out << fmt::format(R"(<polygon points="{}" fill="#000000" fill-opacity="0.12" stroke="none"/>)",
                       polyline(band))
        << "\n";
  }

  std::size_t ci = 0;
  for (const auto& [country, pts] : by_country) {
    const std::string color = kPalette[ci++ % std::size(kPalette)];
    for (std::size_t i = 0; i < pts.first.size(); ++i) {
      out << fmt::format(R"(<circle cx="{}" cy="{}" r="3" fill="{}" fill-opacity="0.8"/>)", f2(xa(pts.first[i])),
                         f2(ya(pts.second[i])), color)
          << "\n";
    }
    if (const auto fit = fit_line(pts.first, pts.second)) {
      const auto [mn, mx] = std::minmax_element(pts.first.begin(), pts.first.end());
      out << fmt::format(
                 R"(<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="1.5" stroke-dasharray="6,4"/>)",
                 f2(xa(*mn)), f2(ya(std::clamp(fit->at(*mn), ya.range.lo, ya.range.hi))), f2(xa(*mx)),
                 f2(ya(std::clamp(fit->at(*mx), ya.range.lo, ya.range.hi))), color)
          << "\n";
    }
    const double ly = kTop + 16 + 14 * static_cast<double>(ci - 1);
    out << fmt::format(R"(<text x="{}" y="{}" fill="{}">{}</text>)", f2(kWidth - kRight - 60), f2(ly), color,
                       escape(country))
        << "\n";
  }
  if (overall) {
    const double a = xa.range.lo, b = xa.range.hi;
    out << fmt::format(R"(<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#000000" stroke-width="2"/>)", f2(xa(a)),
                       f2(ya(std::clamp(overall->at(a), ya.range.lo, ya.range.hi))), f2(xa(b)),
                       f2(ya(std::clamp(overall->at(b), ya.range.lo, ya.range.hi))))
        << "\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace emi::cli
