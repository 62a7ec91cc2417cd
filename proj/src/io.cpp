#include "emhd/io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace emhd {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_field_csv(const SampledField& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "# x_min=" << fmt(f.grid.x_min) << " x_max=" << fmt(f.grid.x_max)
      << " n=" << f.grid.n << " parity=" << to_string(f.parity) << " support=";
  for (size_t i = 0; i < f.support.size(); ++i) {
    if (i) out << ";";
    out << fmt(f.support[i].lo) << ":" << fmt(f.support[i].hi);
  }
  out << "\n";
  out << "x,value\n";
  for (int i = 0; i < f.grid.n; ++i)
    out << fmt(f.grid.point(i)) << "," << fmt(f.values[i]) << "\n";
}

SampledField read_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string header;
  std::getline(in, header);
  SampledField f;
  if (header.rfind("# ", 0) != 0) throw SchemaError("field csv: missing metadata header");
  std::istringstream hs(header.substr(2));
  std::string tok;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "x_min") f.grid.x_min = std::stod(val);
    else if (key == "x_max") f.grid.x_max = std::stod(val);
    else if (key == "n") f.grid.n = std::stoi(val);
    else if (key == "parity") f.parity = parity_from_string(val);
    else if (key == "support" && !val.empty()) {
      std::istringstream ss(val);
      std::string part;
      while (std::getline(ss, part, ';')) {
        const auto c = part.find(':');
        if (c == std::string::npos) throw SchemaError("field csv: bad support");
        f.support.push_back({std::stod(part.substr(0, c)), std::stod(part.substr(c + 1))});
      }
    }
  }
  std::string line;
  std::getline(in, line);  // column header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = line.find(',');
    if (c == std::string::npos) throw SchemaError("field csv: bad row '" + line + "'");
    f.values.push_back(std::stod(line.substr(c + 1)));
  }
  if (static_cast<int>(f.values.size()) != f.grid.n)
    throw SchemaError("field csv: row count does not match grid");
  return f;
}

void write_trajectory_csv(const CascadeTrajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  const int n = traj.params.n;
  out << "t";
  for (int k = 0; k <= n; ++k) out << ",x_" << k;
  for (int k = 0; k <= n; ++k) out << ",a_" << k;
  out << "\n";
  for (const auto& s : traj.states) {
    out << fmt(s.t);
    for (double v : s.x) out << "," << fmt(v);
    for (double v : s.a) out << "," << fmt(v);
    out << "\n";
  }
}

void write_monitor_csv(const std::vector<MonitorRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "t,max_h4,sqrtE_over_t";
  for (int i = 1; i <= 8; ++i) out << ",E" << i << "_ratio";
  out << "\n";
  for (const auto& r : rows) {
    out << fmt(r.t) << "," << fmt(r.max_h4) << "," << fmt(r.sqrtE_over_t);
    for (int i = 0; i < 8; ++i) out << "," << fmt(r.Ei_ratio[i]);
    out << "\n";
  }
}

std::string params_to_json(const ModelParams& p) {
  nlohmann::json j;
  j["b"] = p.b;
  j["A"] = p.A;
  j["r"] = p.r;
  j["n"] = p.n;
  j["epsilon"] = p.epsilon;
  j["c"] = p.exponents.c;
  j["d"] = p.exponents.d;
  j["T"] = p.T;
  j["mu"] = p.mu;
  j["alpha"] = p.alpha;
  j["include_b_in_ode"] = p.include_b_in_ode;
  j["pts_per_bubble"] = p.pts_per_bubble;
  j["margin"] = p.margin;
  return j.dump(2);
}

ModelParams params_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ModelParams p;
  p.b = j.value("b", p.b);
  p.A = j.value("A", p.A);
  p.r = j.value("r", p.r);
  p.n = j.value("n", p.n);
  p.epsilon = j.value("epsilon", p.epsilon);
  p.exponents.c = j.value("c", p.exponents.c);
  p.exponents.d = j.value("d", p.exponents.d);
  p.T = j.value("T", p.T);
  p.mu = j.value("mu", p.mu);
  p.alpha = j.value("alpha", p.alpha);
  p.include_b_in_ode = j.value("include_b_in_ode", p.include_b_in_ode);
  p.pts_per_bubble = j.value("pts_per_bubble", p.pts_per_bubble);
  p.margin = j.value("margin", p.margin);
  return p;
}

void write_atlas_checkpoint(const BubbleAtlas& atlas, const std::string& dir,
                            const std::string& tag) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json j;
  j["params"] = nlohmann::json::parse(params_to_json(atlas.params));
  j["t"] = atlas.cascade.t;
  j["x"] = atlas.cascade.x;
  j["a"] = atlas.cascade.a;
  j["bubbles"] = atlas.params.n + 1;
  std::ofstream(dir + "/" + tag + ".json") << j.dump(2) << "\n";
  for (int k = 0; k <= atlas.n(); ++k)
    write_field_csv(atlas.profiles[k], dir + "/" + tag + "_W" + std::to_string(k) + ".csv");
}

BubbleAtlas read_atlas_checkpoint(const std::string& dir, const std::string& tag) {
  std::ifstream in(dir + "/" + tag + ".json");
  if (!in) throw IoError("cannot open checkpoint manifest " + dir + "/" + tag + ".json");
  nlohmann::json j;
  in >> j;
  BubbleAtlas atlas;
  atlas.params = params_from_json(j["params"].dump());
  atlas.cascade.t = j["t"].get<double>();
  atlas.cascade.x = j["x"].get<std::vector<double>>();
  atlas.cascade.a = j["a"].get<std::vector<double>>();
  for (int k = 0; k <= atlas.params.n; ++k)
    atlas.profiles.push_back(read_field_csv(dir + "/" + tag + "_W" + std::to_string(k) + ".csv"));
  atlas.validate();
  return atlas;
}

std::string run_id_from(const std::string& canonical) {
  // FNV-1a, 64-bit, hex -- a short git-style content id
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

namespace {

bool numeric_token(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

void diff_csv(const std::string& a, const std::string& b, double tol, DiffReport& rep) {
  std::ifstream fa(a), fb(b);
  if (!fa || !fb) {
    rep.schema_ok = false;
    return;
  }
  std::string la, lb;
  int row = 0;
  while (true) {
    const bool ga = static_cast<bool>(std::getline(fa, la));
    const bool gb = static_cast<bool>(std::getline(fb, lb));
    if (ga != gb) {
      rep.schema_ok = false;
      rep.numeric_diffs.push_back(a + ": row count mismatch");
      return;
    }
    if (!ga) break;
    ++row;
    if (la == lb) continue;
    std::istringstream sa(la), sb(lb);
    std::string ta, tb;
    int col = 0;
    while (std::getline(sa, ta, ',')) {
      if (!std::getline(sb, tb, ',')) {
        rep.schema_ok = false;
        return;
      }
      ++col;
      double va, vb;
      if (numeric_token(ta, va) && numeric_token(tb, vb)) {
        const double rel = std::abs(va - vb) / std::max({std::abs(va), std::abs(vb), 1e-300});
        rep.max_rel_numeric = std::max(rep.max_rel_numeric, rel);
        if (rel > tol) {
          rep.within_tol = false;
          if (rep.numeric_diffs.size() < 32)
            rep.numeric_diffs.push_back(a + ":" + std::to_string(row) + "," +
                                        std::to_string(col) + " rel=" + fmt(rel));
        }
      } else if (ta != tb) {
        rep.schema_ok = false;
        rep.numeric_diffs.push_back(a + ":" + std::to_string(row) + " token mismatch");
        return;
      }
    }
  }
}

}  // namespace

DiffReport diff_runs(const std::string& manifest_a, const std::string& manifest_b,
                     double rel_tol) {
  DiffReport rep;
  std::ifstream ia(manifest_a), ib(manifest_b);
  if (!ia || !ib) throw IoError("diff_runs: cannot open manifests");
  nlohmann::json ja, jb;
  try {
    ia >> ja;
    ib >> jb;
  } catch (const std::exception& e) {
    throw SchemaError(std::string("diff_runs: bad manifest json: ") + e.what());
  }
  if (ja.value("mode", "") != jb.value("mode", ""))
    throw SchemaError("diff_runs: manifests have different modes");

  // config-level diffs
  const auto pa = ja["params"], pb = jb["params"];
  for (auto it = pa.begin(); it != pa.end(); ++it) {
    if (!pb.contains(it.key()) || pb[it.key()] != it.value()) {
      rep.config_changed = true;
      rep.config_diffs.push_back(it.key());
    }
  }

  // artifact-level numeric diffs
  namespace fs = std::filesystem;
  const fs::path dir_a = fs::path(manifest_a).parent_path();
  const fs::path dir_b = fs::path(manifest_b).parent_path();
  if (ja.contains("artifacts")) {
    for (const auto& art : ja["artifacts"]) {
      const std::string name = art.get<std::string>();
      const fs::path fa = dir_a / name, fb = dir_b / name;
      if (!fs::exists(fb)) {
        rep.schema_ok = false;
        rep.numeric_diffs.push_back(name + " missing in second run");
        continue;
      }
      if (fa.extension() == ".csv") diff_csv(fa.string(), fb.string(), rel_tol, rep);
    }
  }
  return rep;
}

void write_svg_plot(const std::string& path, const std::vector<PlotSeries>& series,
                    const std::string& title, bool loglog) {
  const int W = 720, H = 480, ml = 70, mr = 20, mt = 40, mb = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  auto tx = [&](double v) { return loglog ? std::log10(std::max(v, 1e-300)) : v; };
  for (const auto& s : series)
    for (size_t i = 0; i < s.x.size(); ++i) {
      xmin = std::min(xmin, tx(s.x[i]));
      xmax = std::max(xmax, tx(s.x[i]));
      ymin = std::min(ymin, tx(s.y[i]));
      ymax = std::max(ymax, tx(s.y[i]));
    }
  if (!(xmax > xmin)) { xmax = xmin + 1; }
  if (!(ymax > ymin)) { ymax = ymin + 1; }
  auto px = [&](double v) { return ml + (tx(v) - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto py = [&](double v) { return H - mb - (tx(v) - ymin) / (ymax - ymin) * (H - mt - mb); };

  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
      << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << W / 2 << "' y='24' text-anchor='middle' font-size='15'>"
      << title << "</text>\n";
  out << "<rect x='" << ml << "' y='" << mt << "' width='" << W - ml - mr << "' height='"
      << H - mt - mb << "' fill='none' stroke='#999'/>\n";
  char lab[64];
  std::snprintf(lab, sizeof(lab), "%.3g .. %.3g", loglog ? std::pow(10, xmin) : xmin,
                loglog ? std::pow(10, xmax) : xmax);
  out << "<text x='" << W / 2 << "' y='" << H - 14 << "' text-anchor='middle' font-size='12'>"
      << lab << "</text>\n";
  std::snprintf(lab, sizeof(lab), "%.3g .. %.3g", loglog ? std::pow(10, ymin) : ymin,
                loglog ? std::pow(10, ymax) : ymax);
  out << "<text x='16' y='" << H / 2 << "' font-size='12' transform='rotate(-90 16 "
      << H / 2 << ")' text-anchor='middle'>" << lab << "</text>\n";
  for (const auto& s : series) {
    if (s.line) {
      out << "<polyline fill='none' stroke='" << s.color << "' stroke-width='1.5' points='";
      for (size_t i = 0; i < s.x.size(); ++i)
        out << px(s.x[i]) << "," << py(s.y[i]) << " ";
      out << "'/>\n";
    } else {
      for (size_t i = 0; i < s.x.size(); ++i)
        out << "<circle cx='" << px(s.x[i]) << "' cy='" << py(s.y[i])
            << "' r='2.5' fill='" << s.color << "'/>\n";
    }
  }
  out << "</svg>\n";
}

}  // namespace emhd
