#pragma once

#include <string>
#include <vector>

namespace insole {

// Minimal deterministic SVG plotting: stacked panels, polylines, error bars
// and labeled vertical spans. Coordinates are formatted with fixed precision
// so repeated runs emit byte-identical files.
class SvgFigure {
public:
  SvgFigure(int width_px = 860, int panel_height_px = 240);

  class Panel {
  public:
    void set_title(std::string title) { title_ = std::move(title); }
    void set_labels(std::string x, std::string y) {
      x_label_ = std::move(x);
      y_label_ = std::move(y);
    }
    void polyline(const std::vector<double> &xs, const std::vector<double> &ys,
                  const std::string &color, double width = 1.5,
                  const std::string &legend = "");
    void error_bars(const std::vector<double> &xs, const std::vector<double> &ys,
                    const std::vector<double> &half_height,
                    const std::string &color, const std::string &legend = "");
    // Background span between x0 and x1 (used for phase bands).
    void vspan(double x0, double x1, const std::string &color,
               const std::string &label = "");

  private:
    friend class SvgFigure;
    struct Line {
      std::vector<double> xs, ys;
      std::string color;
      double width;
    };
    struct Bars {
      std::vector<double> xs, ys, half;
      std::string color;
    };
    struct Span {
      double x0, x1;
      std::string color, label;
    };
    struct LegendEntry {
      std::string label, color;
    };
    std::string title_, x_label_, y_label_;
    std::vector<Line> lines_;
    std::vector<Bars> bars_;
    std::vector<Span> spans_;
    std::vector<LegendEntry> legend_;
    void extent(double &x0, double &x1, double &y0, double &y1) const;
  };

  Panel &add_panel();
  // timestamp empty -> no generation comment (deterministic mode).
  void save(const std::string &path, const std::string &timestamp = "") const;

private:
  int width_, panel_height_;
  std::vector<Panel> panels_;
};

} // namespace insole
