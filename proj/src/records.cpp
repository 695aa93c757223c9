#include "coordsim/records.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace coordsim {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

nlohmann::json indexset_to_json(const IndexSet& s) {
  return nlohmann::json{{"domain", s.domain()}, {"members", s.to_vector()}};
}

IndexSet indexset_from_json(const nlohmann::json& j) {
  IndexSet s(j.at("domain").get<int>());
  for (int m : j.at("members").get<std::vector<int>>()) s.insert(m);
  return s;
}

nlohmann::json spectrum_to_json(const PolarSpectrum& spec) {
  nlohmann::json profiles;
  for (const auto& [label, prof] : spec.profiles) {
    profiles[profile_label_name(label)] = {
        {"mean", prof.mean}, {"std_err", prof.std_err}, {"samples", prof.samples}};
  }
  return nlohmann::json{
      {"n", spec.n}, {"samples", spec.samples}, {"seed", spec.seed}, {"profiles", profiles}};
}

PolarSpectrum spectrum_from_json(const nlohmann::json& j) {
  PolarSpectrum spec;
  spec.n = j.at("n").get<int>();
  spec.samples = j.at("samples").get<int>();
  spec.seed = j.at("seed").get<uint64_t>();
  for (ProfileLabel label : all_profile_labels()) {
    const nlohmann::json& p = j.at("profiles").at(profile_label_name(label));
    EntropyProfile prof;
    prof.mean = p.at("mean").get<std::vector<double>>();
    prof.std_err = p.at("std_err").get<std::vector<double>>();
    prof.samples = p.at("samples").get<int>();
    spec.profiles.emplace(label, std::move(prof));
  }
  return spec;
}

nlohmann::json family_to_json(const SetFamily& fam) {
  return nlohmann::json{
      {"n", fam.n},           {"eps_vh", fam.eps_vh},
      {"eps_h", fam.eps_h},   {"v_c", indexset_to_json(fam.v_c)},
      {"v_c_x", indexset_to_json(fam.v_c_x)},
      {"v_c_xy", indexset_to_json(fam.v_c_xy)},
      {"h_c_b", indexset_to_json(fam.h_c_b)},
      {"h_c_a", indexset_to_json(fam.h_c_a)},
      {"v_a", indexset_to_json(fam.v_a)},
      {"v_a_c", indexset_to_json(fam.v_a_c)},
      {"v_a_cx", indexset_to_json(fam.v_a_cx)},
      {"v_a_cxy", indexset_to_json(fam.v_a_cxy)},
      {"v_y_bc", indexset_to_json(fam.v_y_bc)},
      {"f1", indexset_to_json(fam.f1)},
      {"f2", indexset_to_json(fam.f2)},
      {"f3", indexset_to_json(fam.f3)},
      {"f4", indexset_to_json(fam.f4)},
      {"f4hat", indexset_to_json(fam.f4hat)},
      {"f4check", indexset_to_json(fam.f4check)},
      {"f5", indexset_to_json(fam.f5)},
      {"f6", indexset_to_json(fam.f6)},
      {"f7", indexset_to_json(fam.f7)},
      {"f8", indexset_to_json(fam.f8)},
      {"f9", indexset_to_json(fam.f9)},
      {"partition_filled", fam.partition_filled}};
}

SetFamily family_from_json(const nlohmann::json& j) {
  SetFamily fam;
  fam.n = j.at("n").get<int>();
  fam.eps_vh = j.at("eps_vh").get<double>();
  fam.eps_h = j.at("eps_h").get<double>();
  fam.v_c = indexset_from_json(j.at("v_c"));
  fam.v_c_x = indexset_from_json(j.at("v_c_x"));
  fam.v_c_xy = indexset_from_json(j.at("v_c_xy"));
  fam.h_c_b = indexset_from_json(j.at("h_c_b"));
  fam.h_c_a = indexset_from_json(j.at("h_c_a"));
  fam.v_a = indexset_from_json(j.at("v_a"));
  fam.v_a_c = indexset_from_json(j.at("v_a_c"));
  fam.v_a_cx = indexset_from_json(j.at("v_a_cx"));
  fam.v_a_cxy = indexset_from_json(j.at("v_a_cxy"));
  fam.v_y_bc = indexset_from_json(j.at("v_y_bc"));
  fam.f1 = indexset_from_json(j.at("f1"));
  fam.f2 = indexset_from_json(j.at("f2"));
  fam.f3 = indexset_from_json(j.at("f3"));
  fam.f4 = indexset_from_json(j.at("f4"));
  fam.f4hat = indexset_from_json(j.at("f4hat"));
  fam.f4check = indexset_from_json(j.at("f4check"));
  fam.f5 = indexset_from_json(j.at("f5"));
  fam.f6 = indexset_from_json(j.at("f6"));
  fam.f7 = indexset_from_json(j.at("f7"));
  fam.f8 = indexset_from_json(j.at("f8"));
  fam.f9 = indexset_from_json(j.at("f9"));
  fam.partition_filled = j.at("partition_filled").get<bool>();
  return fam;
}

nlohmann::json layout_to_json(const ChainLayout& layout) {
  return nlohmann::json{{"k", layout.k},
                        {"f31_size", layout.f31_size},
                        {"f32_size", layout.f32_size},
                        {"f31_acute", indexset_to_json(layout.f31_acute)},
                        {"f32_acute", indexset_to_json(layout.f32_acute)},
                        {"j_block_bits", layout.j_block_bits},
                        {"j1_bar_bits", layout.j1_bar_bits},
                        {"j2_bar_bits", layout.j2_bar_bits},
                        {"m1_block_bits", layout.m1_block_bits}};
}

ChainLayout layout_from_json(const nlohmann::json& j) {
  ChainLayout layout;
  layout.k = j.at("k").get<int>();
  layout.f31_size = j.at("f31_size").get<int>();
  layout.f32_size = j.at("f32_size").get<int>();
  layout.f31_acute = indexset_from_json(j.at("f31_acute"));
  layout.f32_acute = indexset_from_json(j.at("f32_acute"));
  layout.j_block_bits = j.at("j_block_bits").get<int>();
  layout.j1_bar_bits = j.at("j1_bar_bits").get<int>();
  layout.j2_bar_bits = j.at("j2_bar_bits").get<int>();
  layout.m1_block_bits = j.at("m1_block_bits").get<int>();
  return layout;
}

nlohmann::json artifacts_to_json(const BuildArtifacts& art, uint64_t cache_key) {
  return nlohmann::json{{"kind", "coordsim.sets"},
                        {"version", kRecordVersion},
                        {"cache_key", cache_key},
                        {"spectrum", spectrum_to_json(art.spectrum)},
                        {"family", family_to_json(art.family)},
                        {"layout", layout_to_json(art.layout)}};
}

BuildArtifacts artifacts_from_json(const nlohmann::json& j) {
  if (j.at("kind").get<std::string>() != "coordsim.sets" ||
      j.at("version").get<int>() != kRecordVersion)
    throw std::runtime_error("artifacts_from_json: unknown record kind or version");
  BuildArtifacts art;
  art.spectrum = spectrum_from_json(j.at("spectrum"));
  art.family = family_from_json(j.at("family"));
  art.layout = layout_from_json(j.at("layout"));
  return art;
}

nlohmann::json report_to_json(const SimReport& rep) {
  return nlohmann::json{{"kind", "coordsim.report"},
                        {"version", kRecordVersion},
                        {"seed", rep.seed},
                        {"trials", rep.trials},
                        {"rates",
                         {{"R_o", rep.rates.r_o},
                          {"R_c", rep.rates.r_c},
                          {"R_a", rep.rates.r_a},
                          {"rho1", rep.rates.rho1},
                          {"rho2", rep.rates.rho2}}},
                        {"tv", rep.tv},
                        {"kl", rep.kl},
                        {"per_block_tv", rep.per_block_tv},
                        {"empirical_xy", rep.empirical_xy},
                        {"pooled_pairs", rep.pooled_pairs},
                        {"margins", rep.region.margins},
                        {"feasible", rep.region.feasible},
                        {"rc_conflict", rep.region.rc_conflict},
                        {"common_bits", rep.common_bits},
                        {"m1_bits", rep.m1_bits},
                        {"m2_draws", rep.m2_draws},
                        {"side_payload_bits", rep.side_payload_bits},
                        {"side_overhead_per_action", rep.side_overhead_per_action}};
}

namespace {

std::string csv_common(const ExperimentConfig& cfg) {
  std::string s;
  s += std::to_string(cfg.n) + "," + std::to_string(cfg.k) + ",";
  s += fmt_double(cfg.eps_vh) + "," + fmt_double(cfg.eps_h) + ",";
  s += std::to_string(cfg.spectrum_samples) + "," + std::to_string(cfg.construction_seed) + ",";
  s += std::to_string(cfg.trials) + "," + std::to_string(cfg.seed) + ",";
  s += (cfg.mode == DecodeMode::sample ? "sample" : "argmax");
  s += ",";
  s += (cfg.sidechannel == SideChannelMode::ideal ? "ideal" : "repetition");
  return s;
}

std::string csv_rates_margins(const CodeRates& r, const RegionReport& g, double tv, double kl) {
  std::string s;
  s += fmt_double(r.r_o) + "," + fmt_double(r.r_c) + "," + fmt_double(r.r_a) + "," +
       fmt_double(r.rho1) + "," + fmt_double(r.rho2) + ",";
  s += fmt_double(tv) + "," + fmt_double(kl);
  for (double m : g.margins) s += "," + fmt_double(m);
  s += std::string(",") + (g.feasible ? "1" : "0");
  return s;
}

}  // namespace

std::string report_csv_header() {
  return "# coordsim-csv-v1\n"
         "n,k,eps_vh,eps_h,spectrum_samples,construction_seed,trials,seed,mode,sidechannel,"
         "R_o,R_c,R_a,rho1,rho2,tv,kl,"
         "margin_a,margin_b,margin_c,margin_d,margin_e,margin_f,margin_g,feasible\n";
}

std::string report_csv_row(const ExperimentConfig& cfg, const SimReport& rep) {
  return csv_common(cfg) + "," + csv_rates_margins(rep.rates, rep.region, rep.tv, rep.kl) + "\n";
}

std::string rates_csv_row(const ExperimentConfig& cfg, const CodeRates& rates,
                          const RegionReport& region) {
  return csv_common(cfg) + "," +
         csv_rates_margins(rates, region, std::nan(""), std::nan("")) + "\n";
}

std::string hex_pack(const std::vector<uint8_t>& symbols) {
  static const char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(symbols.size());
  for (uint8_t s : symbols) out += digits[s & 0xF];
  return out;
}

nlohmann::json block_trace_to_json(const BlockTrace& trace, int trial, int block) {
  return nlohmann::json{{"trial", trial},       {"block", block},
                        {"u2", hex_pack(trace.u2)},    {"c", hex_pack(trace.c)},
                        {"u1", hex_pack(trace.u1)},    {"a", hex_pack(trace.a)},
                        {"b", hex_pack(trace.b)},      {"u2_hat", hex_pack(trace.u2_hat)},
                        {"c_hat", hex_pack(trace.c_hat)}, {"t", hex_pack(trace.t)},
                        {"y", hex_pack(trace.y)}};
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("atomic_write: cannot open " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("atomic_write: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

uint64_t fnv1a64(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace coordsim
