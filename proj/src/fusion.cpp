#include "emi/fusion.hpp"

#include <cmath>
#include <unordered_map>

#include <spdlog/spdlog.h>

namespace emi::fusion {

using nlohmann::json;

namespace {

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& v) {
  if (v.size() < 2) {
    throw std::invalid_argument("zscore needs at least 2 values, got " + std::to_string(v.size()));
  }
  double sum = 0.0;
  for (const double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (const double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  if (!(sd > 0.0)) throw ZeroVarianceError("zscore: zero variance");
  return {mean, sd};
}

}  // namespace

std::vector<double> zscore(const std::vector<double>& values) {
  const auto [mean, sd] = mean_sd(values);
  std::vector<double> out;
  out.reserve(values.size());
  for (const double x : values) out.push_back((x - mean) / sd);
  return out;
}

ZScope parse_z_scope(std::string_view text) {
  if (text == "country") return ZScope::country;
  if (text == "global") return ZScope::global;
  throw std::invalid_argument("unknown z_scope '" + std::string(text) + "'");
}

std::string to_string(ZScope scope) { return scope == ZScope::country ? "country" : "global"; }

void to_json(json& j, const SegmentScore& s) {
  j = json{{"segment_id", s.segment_id}, {"country", s.country},     {"year", s.year},
           {"emi_llm_raw", s.emi_llm_raw}, {"emi_emb_raw", s.emi_emb_raw}, {"z_llm", s.z_llm},
           {"z_emb", s.z_emb},           {"emi", s.emi}};
}

void from_json(const json& j, SegmentScore& s) {
  s.segment_id = j.at("segment_id").get<std::string>();
  s.country = j.at("country").get<std::string>();
  s.year = j.at("year").get<int>();
  s.emi_llm_raw = j.at("emi_llm_raw").get<double>();
  s.emi_emb_raw = j.at("emi_emb_raw").get<double>();
  s.z_llm = j.at("z_llm").get<double>();
  s.z_emb = j.at("z_emb").get<double>();
  s.emi = j.at("emi").get<double>();
}

void to_json(json& j, const GroupStats& g) {
  j = json{{"n", g.n}, {"mean_llm", g.mean_llm}, {"sd_llm", g.sd_llm},
           {"mean_emb", g.mean_emb}, {"sd_emb", g.sd_emb}};
}

FuseResult fuse(const std::vector<preprocess::Segment>& segments,
                const std::vector<rater::EnsembleEpistemicScore>& llm,
                const std::vector<embedder::SegmentEmbeddingScore>& emb, ZScope scope) {
  std::unordered_map<std::string, double> llm_by_id;
  for (const auto& s : llm) llm_by_id.emplace(s.segment_id, s.emi_llm_raw);
  std::unordered_map<std::string, double> emb_by_id;
  for (const auto& s : emb) emb_by_id.emplace(s.segment_id, s.emi_emb_raw);

  FuseResult out;
  std::map<std::string, std::vector<std::size_t>> members;
  for (const auto& seg : segments) {
    const auto l = llm_by_id.find(seg.segment_id);
    const auto e = emb_by_id.find(seg.segment_id);
    if (l == llm_by_id.end() || e == emb_by_id.end()) {
      const char* reason = l == llm_by_id.end() && e == emb_by_id.end() ? "missing_both"
                           : l == llm_by_id.end()                       ? "missing_llm"
                                                                        : "missing_emb";
      out.dropped.push_back({seg.segment_id, reason});
      continue;
    }
    SegmentScore s;
    s.segment_id = seg.segment_id;
    s.country = seg.country;
    s.year = seg.year;
    s.emi_llm_raw = l->second;
    s.emi_emb_raw = e->second;
    members[scope == ZScope::country ? seg.country : "ALL"].push_back(out.scores.size());
    out.scores.push_back(std::move(s));
  }
  if (out.scores.empty()) {
    throw std::runtime_error("fuse: no segment has both an LLM and an embedding score");
  }

  for (const auto& [group, idx] : members) {
    std::vector<double> raw_llm;
    std::vector<double> raw_emb;
    raw_llm.reserve(idx.size());
    raw_emb.reserve(idx.size());
    for (const auto i : idx) {
      raw_llm.push_back(out.scores[i].emi_llm_raw);
      raw_emb.push_back(out.scores[i].emi_emb_raw);
    }
    MeanSd ml;
    MeanSd me;
    try {
      ml = mean_sd(raw_llm);
      me = mean_sd(raw_emb);
    } catch (const std::exception& e) {
      throw ZeroVarianceError("fuse: standardization group '" + group + "' (" +
                              std::to_string(idx.size()) + " segments): " + e.what());
    }
    out.groups[group] = GroupStats{idx.size(), ml.mean, ml.sd, me.mean, me.sd};
    for (const auto i : idx) {
      auto& s = out.scores[i];
      s.z_llm = (s.emi_llm_raw - ml.mean) / ml.sd;
      s.z_emb = (s.emi_emb_raw - me.mean) / me.sd;
      s.emi = (s.z_llm + s.z_emb) / 2.0;
    }
  }
  spdlog::info("fuse: {} scored, {} dropped, {} group(s)", out.scores.size(), out.dropped.size(),
               out.groups.size());
  return out;
}

}  // namespace emi::fusion
