#include "coordsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace coordsim {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

ConfigSections parse_ini(const std::string& text) {
  ConfigSections sections;
  std::string current = "";
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(line_no) + ": malformed section");
      current = lower(trim(line.substr(1, line.size() - 2)));
      sections[current];
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    std::string key = lower(trim(line.substr(0, eq)));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key or value");
    sections[current][key] = value;
  }
  return sections;
}

ConfigSections load_ini_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_ini(buf.str());
}

namespace {

struct KernelSpec {
  std::string name;
  std::vector<double> args;
  std::vector<double> table;
  int rows = 0, cols = 0;
};

KernelSpec parse_kernel(const std::string& raw) {
  KernelSpec spec;
  std::string s = trim(raw);
  std::size_t paren = s.find('(');
  if (paren == std::string::npos) {
    spec.name = lower(s);
    return spec;
  }
  spec.name = lower(trim(s.substr(0, paren)));
  std::size_t close = s.find(')', paren);
  if (close == std::string::npos) throw ConfigError("kernel spec missing ')': " + raw);
  std::string args = s.substr(paren + 1, close - paren - 1);
  std::istringstream in(args);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    try {
      spec.args.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ConfigError("kernel spec has non-numeric argument: " + raw);
    }
  }
  if (spec.name == "table") {
    if (spec.args.size() != 2) throw ConfigError("table(rows,cols) expects two dimensions: " + raw);
    spec.rows = static_cast<int>(spec.args[0]);
    spec.cols = static_cast<int>(spec.args[1]);
    std::size_t colon = s.find(':', close);
    if (colon == std::string::npos) throw ConfigError("table kernel missing ':' body: " + raw);
    std::istringstream body(s.substr(colon + 1));
    double v;
    while (body >> v) spec.table.push_back(v);
    if (static_cast<int>(spec.table.size()) != spec.rows * spec.cols)
      throw ConfigError("table kernel body has wrong cell count: " + raw);
  }
  return spec;
}

double need_arg(const KernelSpec& k, std::size_t i, const std::string& what) {
  if (k.args.size() <= i) throw ConfigError(what + ": missing argument");
  return k.args[i];
}

Channel table_channel(const KernelSpec& k) {
  std::vector<Pmf> rows;
  for (int r = 0; r < k.rows; ++r) {
    std::vector<double> row(k.table.begin() + static_cast<long>(r) * k.cols,
                            k.table.begin() + static_cast<long>(r + 1) * k.cols);
    rows.emplace_back(std::move(row));
  }
  return Channel(std::move(rows));
}

JointPmf parse_p_ac(const std::string& raw) {
  KernelSpec k = parse_kernel(raw);
  if (k.name == "copy") {
    const double q = need_arg(k, 0, "p_ac copy");
    return JointPmf({{"A", 2}, {"C", 2}}, {1.0 - q, 0.0, 0.0, q});
  }
  if (k.name == "noisycopy") {
    const double q = need_arg(k, 0, "p_ac noisycopy");
    const double f = need_arg(k, 1, "p_ac noisycopy");
    // C ~ Bern(q), A = C xor Bern(f); table row-major over (a, c).
    return JointPmf({{"A", 2}, {"C", 2}},
                    {(1.0 - q) * (1.0 - f), q * f, (1.0 - q) * f, q * (1.0 - f)});
  }
  if (k.name == "independent") {
    const double qa = need_arg(k, 0, "p_ac independent");
    const double qc = need_arg(k, 1, "p_ac independent");
    return JointPmf({{"A", 2}, {"C", 2}},
                    {(1.0 - qa) * (1.0 - qc), (1.0 - qa) * qc, qa * (1.0 - qc), qa * qc});
  }
  if (k.name == "uniform") return JointPmf({{"A", 2}, {"C", 2}}, {0.25, 0.25, 0.25, 0.25});
  if (k.name == "table") {
    std::vector<double> t = k.table;
    return JointPmf({{"A", static_cast<std::size_t>(k.rows)},
                     {"C", static_cast<std::size_t>(k.cols)}},
                    std::move(t));
  }
  throw ConfigError("unknown p_ac preset: " + raw);
}

Channel parse_x_kernel(const std::string& raw, std::size_t na, std::size_t nc) {
  KernelSpec k = parse_kernel(raw);
  std::vector<Pmf> rows;
  auto per_ac = [&](auto&& row_for) {
    for (std::size_t a = 0; a < na; ++a)
      for (std::size_t c = 0; c < nc; ++c) rows.push_back(row_for(a, c));
  };
  if (k.name == "copy_c") {
    per_ac([&](std::size_t, std::size_t c) { return Pmf::point_mass(nc, c); });
    return Channel(std::move(rows));
  }
  if (k.name == "copy_a") {
    per_ac([&](std::size_t a, std::size_t) { return Pmf::point_mass(na, a); });
    return Channel(std::move(rows));
  }
  if (k.name == "bsc_c") {
    const double p = need_arg(k, 0, "bsc_c");
    per_ac([&](std::size_t, std::size_t c) { return Pmf::bernoulli(c ? 1.0 - p : p); });
    return Channel(std::move(rows));
  }
  if (k.name == "bsc_a") {
    const double p = need_arg(k, 0, "bsc_a");
    per_ac([&](std::size_t a, std::size_t) { return Pmf::bernoulli(a ? 1.0 - p : p); });
    return Channel(std::move(rows));
  }
  if (k.name == "bec_c") {
    const double e = need_arg(k, 0, "bec_c");
    per_ac([&](std::size_t, std::size_t c) {
      std::vector<double> row(3, 0.0);
      row[c] = 1.0 - e;
      row[2] = e;
      return Pmf(std::move(row));
    });
    return Channel(std::move(rows));
  }
  if (k.name == "uniform") {
    const std::size_t m = static_cast<std::size_t>(need_arg(k, 0, "uniform"));
    per_ac([&](std::size_t, std::size_t) { return Pmf::uniform(m); });
    return Channel(std::move(rows));
  }
  if (k.name == "table") return table_channel(k);
  throw ConfigError("unknown p_x_given_ac preset: " + raw);
}

Channel parse_b_kernel(const std::string& raw, std::size_t na) {
  KernelSpec k = parse_kernel(raw);
  if (k.name == "identity") return Channel::identity(na);
  if (k.name == "bsc") return Channel::bsc(need_arg(k, 0, "bsc"));
  if (k.name == "bec") return Channel::bec(need_arg(k, 0, "bec"));
  if (k.name == "table") return table_channel(k);
  throw ConfigError("unknown p_b_given_a preset: " + raw);
}

Channel parse_y_kernel(const std::string& raw, std::size_t nb, std::size_t nc) {
  KernelSpec k = parse_kernel(raw);
  std::vector<Pmf> rows;
  auto per_bc = [&](auto&& row_for) {
    for (std::size_t b = 0; b < nb; ++b)
      for (std::size_t c = 0; c < nc; ++c) rows.push_back(row_for(b, c));
  };
  if (k.name == "copy_b") {
    per_bc([&](std::size_t b, std::size_t) { return Pmf::point_mass(nb, b); });
    return Channel(std::move(rows));
  }
  if (k.name == "copy_c") {
    per_bc([&](std::size_t, std::size_t c) { return Pmf::point_mass(nc, c); });
    return Channel(std::move(rows));
  }
  if (k.name == "bsc_b") {
    const double p = need_arg(k, 0, "bsc_b");
    if (nb != 2) throw ConfigError("bsc_b requires a binary B alphabet");
    per_bc([&](std::size_t b, std::size_t) { return Pmf::bernoulli(b ? 1.0 - p : p); });
    return Channel(std::move(rows));
  }
  if (k.name == "uniform") {
    const std::size_t m = static_cast<std::size_t>(need_arg(k, 0, "uniform"));
    per_bc([&](std::size_t, std::size_t) { return Pmf::uniform(m); });
    return Channel(std::move(rows));
  }
  if (k.name == "table") return table_channel(k);
  throw ConfigError("unknown p_y_given_bc preset: " + raw);
}

const std::string& need_key(const std::map<std::string, std::string>& section,
                            const std::string& key) {
  auto it = section.find(key);
  if (it == section.end()) throw ConfigError("missing [system] key: " + key);
  return it->second;
}

template <typename T>
T get_or(const ConfigSections& cfg, const std::string& section, const std::string& key, T fallback) {
  auto sit = cfg.find(section);
  if (sit == cfg.end()) return fallback;
  auto it = sit->second.find(key);
  if (it == sit->second.end()) return fallback;
  try {
    if constexpr (std::is_same_v<T, double>) return std::stod(it->second);
    else if constexpr (std::is_same_v<T, uint64_t>) return static_cast<uint64_t>(std::stoull(it->second));
    else if constexpr (std::is_same_v<T, int>) return std::stoi(it->second);
    else return it->second;
  } catch (const std::exception&) {
    throw ConfigError("bad value for [" + section + "] " + key + ": " + it->second);
  }
}

bool get_bool(const ConfigSections& cfg, const std::string& section, const std::string& key,
              bool fallback) {
  auto sit = cfg.find(section);
  if (sit == cfg.end()) return fallback;
  auto it = sit->second.find(key);
  if (it == sit->second.end()) return fallback;
  const std::string v = lower(it->second);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("bad boolean for [" + section + "] " + key + ": " + it->second);
}

}  // namespace

CoordinationSystem parse_system(const std::map<std::string, std::string>& section) {
  JointPmf p_ac = parse_p_ac(need_key(section, "p_ac"));
  const std::size_t na = p_ac.axes()[0].size;
  const std::size_t nc = p_ac.axes()[1].size;
  Channel x_k = parse_x_kernel(need_key(section, "p_x_given_ac"), na, nc);
  Channel b_k = parse_b_kernel(need_key(section, "p_b_given_a"), na);
  Channel y_k = parse_y_kernel(need_key(section, "p_y_given_bc"), b_k.output_size(), nc);
  std::optional<JointPmf> q_override;
  auto it = section.find("q_xy");
  if (it != section.end()) {
    KernelSpec k = parse_kernel(it->second);
    if (k.name != "table") throw ConfigError("q_xy must be an explicit table");
    std::vector<double> t = k.table;
    q_override = JointPmf({{"X", static_cast<std::size_t>(k.rows)},
                           {"Y", static_cast<std::size_t>(k.cols)}},
                          std::move(t));
  }
  try {
    return CoordinationSystem(std::move(p_ac), std::move(x_k), std::move(b_k), std::move(y_k),
                              std::move(q_override));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid [system]: ") + e.what());
  }
}

CliConfig load_config(const std::string& path) {
  ConfigSections sections = load_ini_file(path);
  auto sys_it = sections.find("system");
  if (sys_it == sections.end()) throw ConfigError("config has no [system] section");
  ExperimentConfig exp(parse_system(sys_it->second));
  exp.n = get_or<int>(sections, "code", "n", 3);
  exp.k = get_or<int>(sections, "code", "k", 1);
  exp.eps_vh = get_or<double>(sections, "code", "eps_vh", 0.1);
  exp.eps_h = get_or<double>(sections, "code", "eps_h", 0.1);
  exp.spectrum_samples = get_or<int>(sections, "code", "spectrum_samples", 2000);
  exp.construction_seed = get_or<uint64_t>(sections, "code", "construction_seed", 1);
  exp.trials = get_or<int>(sections, "run", "trials", 100);
  exp.seed = get_or<uint64_t>(sections, "run", "seed", 1);
  const std::string mode = lower(get_or<std::string>(sections, "run", "mode", "sample"));
  if (mode == "sample") exp.mode = DecodeMode::sample;
  else if (mode == "argmax") exp.mode = DecodeMode::argmax;
  else throw ConfigError("bad [run] mode: " + mode);
  const std::string side = lower(get_or<std::string>(sections, "run", "sidechannel", "ideal"));
  if (side == "ideal") exp.sidechannel = SideChannelMode::ideal;
  else if (side == "repetition") exp.sidechannel = SideChannelMode::repetition;
  else throw ConfigError("bad [run] sidechannel: " + side);
  exp.side_repeats = get_or<int>(sections, "run", "side_repeats", 9);
  exp.paper_step4 = get_bool(sections, "run", "paper_step4", false);
  exp.budget_seconds = get_or<double>(sections, "run", "budget_seconds", 0.0);
  if (exp.n < 1 || exp.n > kMaxStages) throw ConfigError("bad [code] n");
  if (exp.k < 1) throw ConfigError("bad [code] k");
  if (exp.trials < 1) throw ConfigError("bad [run] trials");
  if (!(exp.eps_h > 0.0) || !(exp.eps_h <= exp.eps_vh) || !(exp.eps_vh < 1.0))
    throw ConfigError("bad thresholds: need 0 < eps_h <= eps_vh < 1");
  CliConfig cli(std::move(exp));
  cli.export_traces = get_bool(sections, "run", "export_traces", false);
  return cli;
}

std::string construction_fingerprint(const ExperimentConfig& cfg) {
  char buf[64];
  std::string s = "v1|";
  auto add_table = [&](const std::vector<double>& t) {
    for (double v : t) {
      std::snprintf(buf, sizeof buf, "%.17g,", v);
      s += buf;
    }
    s += "|";
  };
  add_table(cfg.sys.p_ac().table());
  auto add_channel = [&](const Channel& ch) {
    for (std::size_t i = 0; i < ch.input_size(); ++i) add_table(ch.row(i).probs());
    s += ";";
  };
  add_channel(cfg.sys.p_x_given_ac());
  add_channel(cfg.sys.p_b_given_a());
  add_channel(cfg.sys.p_y_given_bc());
  std::snprintf(buf, sizeof buf, "n=%d|k=%d|M=%d|", cfg.n, cfg.k, cfg.spectrum_samples);
  s += buf;
  std::snprintf(buf, sizeof buf, "evh=%.17g|eh=%.17g|seed=%llu", cfg.eps_vh, cfg.eps_h,
                static_cast<unsigned long long>(cfg.construction_seed));
  s += buf;
  return s;
}

}  // namespace coordsim
