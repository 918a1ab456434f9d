#include "plot.hpp"

#include <iomanip>
#include <sstream>

namespace ccssp::cli {

namespace {

constexpr double kSize = 500.0;
constexpr double kMargin = 20.0;

double sx(double x) { return kMargin + x * kSize; }
double sy(double y) { return kMargin + (1.0 - y) * kSize; }

void rect(std::ostringstream& out, const Rect& r, const char* fill, const char* label) {
  out << "<rect x=\"" << sx(r.x0) << "\" y=\"" << sy(r.y1) << "\" width=\"" << (r.x1 - r.x0) * kSize
      << "\" height=\"" << (r.y1 - r.y0) * kSize << "\" fill=\"" << fill << "\"><title>" << label
      << "</title></rect>\n";
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const RobotConfig& cfg, const std::vector<Trajectory>& trajectories, const std::string& title) {
  std::ostringstream out;
  out << std::setprecision(6);
  const double total = kSize + 2 * kMargin;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << total << "\" height=\"" << total + 20
      << "\" viewBox=\"0 0 " << total << ' ' << total + 20 << "\">\n";
  out << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kSize << "\" height=\"" << kSize
      << "\" fill=\"white\" stroke=\"black\"/>\n";
  rect(out, cfg.obstacle_a, "#555555", "obstacle A");
  rect(out, cfg.obstacle_b, "#555555", "obstacle B");
  rect(out, cfg.goal, "#7fc97f", "goal");
  rect(out, cfg.init_region, "#fdc086", "start");
  for (const Trajectory& t : trajectories) {
    if (t.positions.size() < 2) continue;
    const char* color = t.outcome == EpisodeOutcome::success   ? "#1f5fbf"
                        : t.outcome == EpisodeOutcome::failure ? "#d62728"
                                                               : "#999999";
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1\" stroke-opacity=\"0.6\" points=\"";
    for (const Point& p : t.positions) out << sx(p.x) << ',' << sy(p.y) << ' ';
    out << "\"/>\n";
  }
  out << "<text x=\"" << kMargin << "\" y=\"" << total + 10 << "\" font-family=\"sans-serif\" font-size=\"12\">"
      << escape(title) << "</text>\n</svg>\n";
  return out.str();
}

std::string trajectory_csv(const Trajectory& t) {
  std::ostringstream out;
  out << std::setprecision(17);
  const bool pos = t.positions.size() == t.states.size() && !t.positions.empty();
  out << "t,state,action,cost,cumulative" << (pos ? ",x,y" : "") << '\n';
  double cum = 0.0;
  for (std::size_t i = 0; i < t.states.size(); ++i) {
    out << i << ',' << t.states[i] << ',';
    if (i > 0) {
      out << t.actions[i - 1] << ',' << t.costs[i - 1];
      cum += t.costs[i - 1];
    } else {
      out << ",0";
    }
    out << ',' << cum;
    if (pos) out << ',' << t.positions[i].x << ',' << t.positions[i].y;
    out << '\n';
  }
  return out.str();
}

}  // namespace ccssp::cli
