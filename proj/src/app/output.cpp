#include "app/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace flashsim::app {

void sort_records(std::vector<FlashRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const FlashRecord& a, const FlashRecord& b) {
    if (a.trajectory != b.trajectory) return a.trajectory < b.trajectory;
    if (a.t != b.t) return a.t < b.t;
    if (a.type != b.type) return a.type < b.type;
    return a.k < b.k;
  });
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string flashes_csv(const std::vector<FlashRecord>& records, int space_dim) {
  std::string out = "trajectory,type,k,t";
  if (space_dim == 1) {
    out += ",x";
  } else {
    for (int i = 1; i <= space_dim; ++i) out += ",x" + std::to_string(i);
  }
  out += '\n';
  for (const FlashRecord& r : records) {
    if (static_cast<int>(r.x.size()) != space_dim) throw std::logic_error("flash record has the wrong dimension");
    out += std::to_string(r.trajectory) + ',' + std::to_string(r.type) + ',' + std::to_string(r.k) + ',' + format_double(r.t);
    for (double x : r.x) out += ',' + format_double(x);
    out += '\n';
  }
  return out;
}

namespace {

const char* kPalette[] = {"#1f5fa8", "#c8452b", "#2d8a3e", "#8a4fb0", "#b8860b", "#17808a"};

// Round step for about `target` ticks over [lo, hi].
double tick_step(double lo, double hi, int target = 6) {
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double f : {1.0, 2.0, 5.0, 10.0})
    if (f * mag >= raw) return f * mag;
  return 10 * mag;
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

}  // namespace

std::string flashes_svg(const std::vector<FlashRecord>& records, const FigureStyle& style) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, tlo = xlo, thi = -xlo;
  for (const FlashRecord& r : records) {
    if (r.x.empty()) continue;
    xlo = std::min(xlo, r.x[0]);
    xhi = std::max(xhi, r.x[0]);
    tlo = std::min(tlo, r.t);
    thi = std::max(thi, r.t);
  }
  if (!(xlo <= xhi)) xlo = -1, xhi = 1, tlo = 0, thi = 1;
  if (xhi - xlo < 1e-9) xlo -= 1, xhi += 1;
  if (thi - tlo < 1e-9) thi = tlo + 1;
  const double padx = 0.04 * (xhi - xlo), padt = 0.04 * (thi - tlo);
  xlo -= padx, xhi += padx, tlo -= padt, thi += padt;

  const double left = 64, right = 20, top = style.title.empty() ? 20 : 40, bottom = 52;
  const double w = style.width - left - right, h = style.height - top - bottom;
  const auto px = [&](double x) { return left + (x - xlo) / (xhi - xlo) * w; };
  const auto py = [&](double t) { return top + (thi - t) / (thi - tlo) * h; };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << style.width << "\" height=\"" << style.height
    << "\" viewBox=\"0 0 " << style.width << ' ' << style.height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!style.title.empty())
    s << "<text x=\"" << style.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"13\">" << style.title << "</text>\n";
  s << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << w << "\" height=\"" << h
    << "\" fill=\"none\" stroke=\"black\"/>\n";

  const double xs = tick_step(xlo, xhi), ts = tick_step(tlo, thi);
  for (double v = std::ceil(xlo / xs) * xs; v <= xhi; v += xs) {
    const double X = px(v);
    s << "<line x1=\"" << X << "\" y1=\"" << top + h << "\" x2=\"" << X << "\" y2=\"" << top + h + 5
      << "\" stroke=\"black\"/><text x=\"" << X << "\" y=\"" << top + h + 18 << "\" text-anchor=\"middle\">"
      << num(std::abs(v) < 1e-12 * xs ? 0.0 : v) << "</text>\n";
  }
  for (double v = std::ceil(tlo / ts) * ts; v <= thi; v += ts) {
    const double Y = py(v);
    s << "<line x1=\"" << left - 5 << "\" y1=\"" << Y << "\" x2=\"" << left << "\" y2=\"" << Y
      << "\" stroke=\"black\"/><text x=\"" << left - 8 << "\" y=\"" << Y + 4 << "\" text-anchor=\"end\">"
      << num(std::abs(v) < 1e-12 * ts ? 0.0 : v) << "</text>\n";
  }
  s << "<text x=\"" << left + w / 2 << "\" y=\"" << style.height - 14 << "\" text-anchor=\"middle\">x (position)</text>\n";
  s << "<text transform=\"translate(16," << top + h / 2 << ") rotate(-90)\" text-anchor=\"middle\">t (time)</text>\n";

  s << "<g stroke=\"none\" fill-opacity=\"0.75\">\n";
  for (const FlashRecord& r : records) {
    if (r.x.empty()) continue;
    const char* colour = kPalette[(r.type - 1) % 6];
    s << "<circle cx=\"" << px(r.x[0]) << "\" cy=\"" << py(r.t) << "\" r=\"" << style.radius << "\" fill=\"" << colour
      << "\"/>\n";
  }
  s << "</g>\n</svg>\n";
  return s.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_run(const std::filesystem::path& dir, const std::vector<FlashRecord>& records, int space_dim,
               const nlohmann::json& summary, const FigureStyle& style) {
  std::filesystem::create_directories(dir);
  write_text(dir / "flashes.csv", flashes_csv(records, space_dim));
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  write_text(dir / "flashes.svg", flashes_svg(records, style));
}

}  // namespace flashsim::app
