#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "error.hpp"

namespace insole {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string &s) {
  std::string out;
  for (char c : s) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    default: out += c;
    }
  }
  return out;
}

// Largest "nice" step (1/2/5 x 10^k) giving <= 6 intervals.
double nice_step(double span) {
  if (!(span > 0.0))
    return 1.0;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag)
      return m * mag;
  return 10.0 * mag;
}

} // namespace

SvgFigure::SvgFigure(int width_px, int panel_height_px)
    : width_(width_px), panel_height_(panel_height_px) {}

SvgFigure::Panel &SvgFigure::add_panel() {
  panels_.emplace_back();
  return panels_.back();
}

void SvgFigure::Panel::polyline(const std::vector<double> &xs,
                                const std::vector<double> &ys,
                                const std::string &color, double width,
                                const std::string &legend) {
  require(xs.size() == ys.size(), Fault::InvalidArgument,
          "polyline coordinate arrays differ in length");
  lines_.push_back({xs, ys, color, width});
  if (!legend.empty())
    legend_.push_back({legend, color});
}

void SvgFigure::Panel::error_bars(const std::vector<double> &xs,
                                  const std::vector<double> &ys,
                                  const std::vector<double> &half_height,
                                  const std::string &color,
                                  const std::string &legend) {
  require(xs.size() == ys.size() && xs.size() == half_height.size(),
          Fault::InvalidArgument, "error bar arrays differ in length");
  bars_.push_back({xs, ys, half_height, color});
  if (!legend.empty())
    legend_.push_back({legend, color});
}

void SvgFigure::Panel::vspan(double x0, double x1, const std::string &color,
                             const std::string &label) {
  spans_.push_back({x0, x1, color, label});
}

void SvgFigure::Panel::extent(double &x0, double &x1, double &y0, double &y1) const {
  bool first = true;
  auto feed = [&](double x, double y) {
    if (first) {
      x0 = x1 = x;
      y0 = y1 = y;
      first = false;
    } else {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  };
  for (const auto &l : lines_)
    for (std::size_t i = 0; i < l.xs.size(); ++i)
      feed(l.xs[i], l.ys[i]);
  for (const auto &b : bars_)
    for (std::size_t i = 0; i < b.xs.size(); ++i) {
      feed(b.xs[i], b.ys[i] - b.half[i]);
      feed(b.xs[i], b.ys[i] + b.half[i]);
    }
  for (const auto &s : spans_) {
    feed(s.x0, first ? 0.0 : y0);
    feed(s.x1, y1);
  }
  if (first) {
    x0 = 0.0;
    x1 = 1.0;
    y0 = 0.0;
    y1 = 1.0;
  }
  if (x1 <= x0)
    x1 = x0 + 1.0;
  if (y1 <= y0)
    y1 = y0 + 1.0;
}

void SvgFigure::save(const std::string &path, const std::string &timestamp) const {
  const int margin_left = 64, margin_right = 16, margin_top = 34,
            margin_bottom = 42;
  const int total_height =
      static_cast<int>(panels_.size()) * panel_height_ + 10;

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_
      << "\" height=\"" << total_height << "\" font-family=\"sans-serif\">\n";
  if (!timestamp.empty())
    out << "<!-- generated " << escape(timestamp) << " -->\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (std::size_t pi = 0; pi < panels_.size(); ++pi) {
    const Panel &panel = panels_[pi];
    const double top = static_cast<double>(pi) * panel_height_ + margin_top;
    const double bottom =
        static_cast<double>(pi + 1) * panel_height_ - margin_bottom;
    const double left = margin_left;
    const double right = width_ - margin_right;

    double x0, x1, y0, y1;
    panel.extent(x0, x1, y0, y1);
    const double ypad = 0.06 * (y1 - y0);
    y0 -= ypad;
    y1 += ypad;

    auto px = [&](double x) {
      return left + (x - x0) / (x1 - x0) * (right - left);
    };
    auto py = [&](double y) {
      return bottom - (y - y0) / (y1 - y0) * (bottom - top);
    };

    out << "<g>\n";
    for (const auto &s : panel.spans_) {
      const double a = px(std::max(s.x0, x0)), b = px(std::min(s.x1, x1));
      if (b <= a)
        continue;
      out << "<rect x=\"" << fmt(a) << "\" y=\"" << fmt(top) << "\" width=\""
          << fmt(b - a) << "\" height=\"" << fmt(bottom - top) << "\" fill=\""
          << s.color << "\" fill-opacity=\"0.35\"/>\n";
      if (!s.label.empty())
        out << "<text x=\"" << fmt(0.5 * (a + b)) << "\" y=\"" << fmt(top + 14)
            << "\" font-size=\"10\" text-anchor=\"middle\">" << escape(s.label)
            << "</text>\n";
    }

    out << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\""
        << fmt(right - left) << "\" height=\"" << fmt(bottom - top)
        << "\" fill=\"none\" stroke=\"black\"/>\n";

    const double xstep = nice_step(x1 - x0);
    for (double tx = std::ceil(x0 / xstep) * xstep; tx <= x1 + 1e-9 * xstep;
         tx += xstep) {
      out << "<line x1=\"" << fmt(px(tx)) << "\" y1=\"" << fmt(bottom)
          << "\" x2=\"" << fmt(px(tx)) << "\" y2=\"" << fmt(bottom + 4)
          << "\" stroke=\"black\"/>\n";
      out << "<text x=\"" << fmt(px(tx)) << "\" y=\"" << fmt(bottom + 16)
          << "\" font-size=\"10\" text-anchor=\"middle\">" << fmt_tick(tx)
          << "</text>\n";
    }
    const double ystep = nice_step(y1 - y0);
    for (double ty = std::ceil(y0 / ystep) * ystep; ty <= y1 + 1e-9 * ystep;
         ty += ystep) {
      out << "<line x1=\"" << fmt(left - 4) << "\" y1=\"" << fmt(py(ty))
          << "\" x2=\"" << fmt(left) << "\" y2=\"" << fmt(py(ty))
          << "\" stroke=\"black\"/>\n";
      out << "<text x=\"" << fmt(left - 7) << "\" y=\"" << fmt(py(ty) + 3)
          << "\" font-size=\"10\" text-anchor=\"end\">" << fmt_tick(ty)
          << "</text>\n";
    }

    for (const auto &b : panel.bars_) {
      for (std::size_t i = 0; i < b.xs.size(); ++i) {
        const double cx = px(b.xs[i]);
        out << "<line x1=\"" << fmt(cx) << "\" y1=\""
            << fmt(py(b.ys[i] - b.half[i])) << "\" x2=\"" << fmt(cx)
            << "\" y2=\"" << fmt(py(b.ys[i] + b.half[i])) << "\" stroke=\""
            << b.color << "\" stroke-opacity=\"0.45\"/>\n";
      }
      out << "<polyline fill=\"none\" stroke=\"" << b.color
          << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < b.xs.size(); ++i)
        out << fmt(px(b.xs[i])) << ',' << fmt(py(b.ys[i])) << ' ';
      out << "\"/>\n";
    }

    for (const auto &l : panel.lines_) {
      out << "<polyline fill=\"none\" stroke=\"" << l.color
          << "\" stroke-width=\"" << fmt(l.width) << "\" points=\"";
      for (std::size_t i = 0; i < l.xs.size(); ++i)
        out << fmt(px(l.xs[i])) << ',' << fmt(py(l.ys[i])) << ' ';
      out << "\"/>\n";
    }

    if (!panel.title_.empty())
      out << "<text x=\"" << fmt(left) << "\" y=\"" << fmt(top - 8)
          << "\" font-size=\"13\" font-weight=\"bold\">" << escape(panel.title_)
          << "</text>\n";
    if (!panel.x_label_.empty())
      out << "<text x=\"" << fmt(0.5 * (left + right)) << "\" y=\""
          << fmt(bottom + 32) << "\" font-size=\"11\" text-anchor=\"middle\">"
          << escape(panel.x_label_) << "</text>\n";
    if (!panel.y_label_.empty())
      out << "<text transform=\"translate(" << fmt(left - 44) << ","
          << fmt(0.5 * (top + bottom)) << ") rotate(-90)\" font-size=\"11\" "
             "text-anchor=\"middle\">"
          << escape(panel.y_label_) << "</text>\n";

    double lx = right - 150;
    double ly = top + 14;
    for (const auto &entry : panel.legend_) {
      out << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\""
          << fmt(lx + 18) << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\""
          << entry.color << "\" stroke-width=\"2\"/>\n";
      out << "<text x=\"" << fmt(lx + 24) << "\" y=\"" << fmt(ly)
          << "\" font-size=\"10\">" << escape(entry.label) << "</text>\n";
      ly += 14;
    }
    out << "</g>\n";
  }
  out << "</svg>\n";

  std::ofstream file(path);
  require(file.good(), Fault::IoError, "cannot write SVG file: " + path);
  file << out.str();
}

} // namespace insole
