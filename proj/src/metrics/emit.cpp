#include "sermt/metrics/emit.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>

namespace sermt::metrics {

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "sweep_value,defense,drop_pct,throughput,avg_bp\n";
  for (const auto& r : rows) {
    out << fmt::format("{:g},{},{:.6f},{:.6f},{:.9f}\n", r.sweep_value, r.defense ? "SERMT" : "baseline",
                       r.metrics.drop_pct, r.metrics.throughput, r.metrics.avg_bp);
  }
}

ChartSpec chart_for(Vary vary) {
  if (vary == Vary::Malicious) {
    return {"Number of malicious nodes vs. packet drop", "Number of malicious nodes", "Packet drop (%)",
            [](const Metrics& m) { return m.drop_pct; }};
  }
  return {"Avg. BP consumed vs. attack interval", "Attack interval (s)", "Avg. BP consumed (mAh/h)",
          [](const Metrics& m) { return m.avg_bp; }};
}

void write_svg(std::ostream& out, const std::vector<SweepRow>& rows, const ChartSpec& chart) {
  constexpr double W = 640, H = 420, L = 70, R = 20, T = 40, B = 60;
  std::map<bool, std::vector<std::pair<double, double>>> series;
  double x0 = 1e300, x1 = -1e300, y1 = 0;
  for (const auto& r : rows) {
    const double y = chart.value(r.metrics);
    series[r.defense].emplace_back(r.sweep_value, y);
    x0 = std::min(x0, r.sweep_value);
    x1 = std::max(x1, r.sweep_value);
    y1 = std::max(y1, y);
  }
  if (x1 <= x0) x0 -= 1, x1 += 1;
  if (y1 <= 0) y1 = 1;
  y1 *= 1.1;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - y / y1 * (H - T - B); };

  out << fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="12">)",
                     W, H)
      << '\n';
  out << fmt::format(R"(<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>)", W / 2, chart.title) << '\n';
  out << fmt::format(R"(<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="black"/>)", L, H - B, W - R) << '\n';
  out << fmt::format(R"(<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="black"/>)", L, T, H - B) << '\n';
  for (int k = 0; k <= 5; ++k) {
    const double x = x0 + (x1 - x0) * k / 5, y = y1 * k / 5;
    out << fmt::format(R"(<text x="{:.1f}" y="{}" text-anchor="middle">{:.3g}</text>)", px(x), H - B + 18, x) << '\n';
    out << fmt::format(R"(<text x="{}" y="{:.1f}" text-anchor="end">{:.3g}</text>)", L - 6, py(y) + 4, y) << '\n';
  }
  out << fmt::format(R"(<text x="{}" y="{}" text-anchor="middle">{}</text>)", (L + W - R) / 2, H - 15, chart.x_label) << '\n';
  out << fmt::format(R"svg(<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>)svg",
                     (T + H - B) / 2, (T + H - B) / 2, chart.y_label)
      << '\n';

  int legend = 0;
  for (bool defense : {true, false}) {
    auto it = series.find(defense);
    if (it == series.end()) continue;
    const char* colour = defense ? "#1f77b4" : "#d62728";
    const char* name = defense ? "SERMT" : "baseline";
    auto pts = it->second;
    std::sort(pts.begin(), pts.end());
    if (pts.size() > 1) {
      std::string poly;
      for (auto [x, y] : pts) poly += fmt::format("{:.1f},{:.1f} ", px(x), py(y));
      poly.pop_back();
      out << fmt::format(R"(<polyline fill="none" stroke="{}" stroke-width="2" points="{}"/>)", colour, poly) << '\n';
    }
    for (auto [x, y] : pts) {
      out << fmt::format(R"(<circle cx="{:.1f}" cy="{:.1f}" r="4" fill="{}"/>)", px(x), py(y), colour) << '\n';
    }
    const double ly = T + 10 + 18 * legend++;
    out << fmt::format(R"(<rect x="{}" y="{}" width="12" height="12" fill="{}"/>)", W - R - 110, ly - 10, colour) << '\n';
    out << fmt::format(R"(<text x="{}" y="{}">{}</text>)", W - R - 92, ly, name) << '\n';
  }
  out << "</svg>\n";
}

void emit(const std::vector<SweepRow>& rows, Format format, const std::filesystem::path& path, Vary vary) {
  if (rows.empty()) throw RuntimeFault("nothing to emit: empty table");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFault(fmt::format("cannot write '{}'", path.string()));
  if (format == Format::Csv) {
    write_csv(out, rows);
  } else {
    write_svg(out, rows, chart_for(vary));
  }
  if (!out.flush()) throw RuntimeFault(fmt::format("write to '{}' failed", path.string()));
}

std::string summary(const Metrics& m) {
  const auto& p = m.protocol;
  std::string s;
  s += fmt::format("packets_sent       {}\n", m.packets_sent);
  s += fmt::format("packets_delivered  {}\n", m.packets_delivered);
  s += fmt::format("drop_pct           {:.4f}\n", m.drop_pct);
  s += fmt::format("throughput_bps     {:.3f}\n", m.throughput);
  s += fmt::format("avg_bp_mah_per_h   {:.6f}\n", m.avg_bp);
  s += fmt::format("mu / pmu delivered {}/{} {}/{}\n", p.mu_delivered, p.mu_sent, p.pmu_delivered, p.pmu_sent);
  s += fmt::format("trust_rounds       {} (converged {}, diverged {})\n", p.trust_rounds, p.tables_converged,
                   p.tables_diverged);
  s += fmt::format("alarms             {} (isolation {}, stale regions {})\n", p.alarms, p.isolation_alarms,
                   p.stale_regions);
  s += fmt::format("integrity_failures {}\n", p.integrity_failures);
  s += fmt::format("forged control     accepted {} rejected {}\n", p.forged_accepted, p.forged_rejected);
  s += fmt::format("plaintext_exposed  {}\n", p.plaintext_exposures);
  s += fmt::format("pdc_failovers      {}\n", p.pdc_failovers);
  s += fmt::format("attack installs    {}\n", m.installs.size());
  s += fmt::format("attack frames      bogus {} swallowed {} tampered {} overheard {} decrypted {}\n",
                   m.attacks.bogus_frames_sent, m.attacks.frames_swallowed, m.attacks.frames_tampered,
                   m.attacks.frames_overheard, m.attacks.payloads_decrypted);
  s += fmt::format("conservation       {}\n", m.conservation_ok ? "ok" : "VIOLATED");
  s += fmt::format("trace              {} records, hash {:016x}\n", m.trace_records, m.trace_hash);
  return s;
}

}  // namespace sermt::metrics
