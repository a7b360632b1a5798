#include "emi/econ/auc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

namespace emi::econ {

using nlohmann::json;

void to_json(json& j, const AucResult& a) {
  j = json{{"auc", a.auc}, {"n_pos", a.n_pos}, {"n_neg", a.n_neg}, {"variance", a.variance}};
}

void to_json(json& j, const DelongResult& d) {
  j = json{{"auc_a", d.auc_a}, {"auc_b", d.auc_b}, {"z", d.z}, {"p", d.p}, {"var_diff", d.var_diff}};
}

std::vector<double> midranks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = static_cast<double>(i + j + 2) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

namespace {

struct Split {
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
};

Split split_labels(std::size_t n, const std::vector<int>& labels) {
  if (labels.size() != n) throw std::invalid_argument("auc: scores and labels differ in length");
  Split s;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] == 1) s.pos.push_back(i);
    else if (labels[i] == 0) s.neg.push_back(i);
    else throw std::invalid_argument("auc: labels must be 0 or 1");
  }
  if (s.pos.empty() || s.neg.empty()) throw std::invalid_argument("auc: labels contain a single class");
  return s;
}

// Structural components: V10 per positive, V01 per negative.
struct Components {
  double auc = 0.0;
  std::vector<double> v10;
  std::vector<double> v01;
};

Components components(const std::vector<double>& scores, const Split& s) {
  // Midrank identities give the components without the O(n1 n0) pair loop:
  // V10_i = (R_i - R_i^pos) / n0 and V01_j = 1 - (R_j - R_j^neg) / n1.
  const auto n1 = s.pos.size();
  const auto n0 = s.neg.size();
  std::vector<double> pos_scores(n1);
  std::vector<double> neg_scores(n0);
  for (std::size_t k = 0; k < n1; ++k) pos_scores[k] = scores[s.pos[k]];
  for (std::size_t k = 0; k < n0; ++k) neg_scores[k] = scores[s.neg[k]];
  std::vector<double> combined(pos_scores);
  combined.insert(combined.end(), neg_scores.begin(), neg_scores.end());
  const auto r_all = midranks(combined);
  const auto r_pos = midranks(pos_scores);
  const auto r_neg = midranks(neg_scores);
  Components c;
  c.v10.resize(n1);
  c.v01.resize(n0);
  double rank_sum = 0.0;
  for (std::size_t k = 0; k < n1; ++k) {
    rank_sum += r_all[k];
    c.v10[k] = (r_all[k] - r_pos[k]) / static_cast<double>(n0);
  }
  for (std::size_t k = 0; k < n0; ++k) {
    c.v01[k] = 1.0 - (r_all[n1 + k] - r_neg[k]) / static_cast<double>(n1);
  }
  const double u = rank_sum - static_cast<double>(n1) * static_cast<double>(n1 + 1) / 2.0;
  c.auc = u / (static_cast<double>(n1) * static_cast<double>(n0));
  return c;
}

double covariance(const std::vector<double>& a, const std::vector<double>& b) {
  const auto n = a.size();
  if (n < 2) return 0.0;
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n);
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += (a[i] - ma) * (b[i] - mb);
  return s / static_cast<double>(n - 1);
}

}  // namespace

AucResult auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  const auto s = split_labels(scores.size(), labels);
  const auto c = components(scores, s);
  AucResult out;
  out.auc = c.auc;
  out.n_pos = s.pos.size();
  out.n_neg = s.neg.size();
  out.variance = covariance(c.v10, c.v10) / static_cast<double>(out.n_pos) +
                 covariance(c.v01, c.v01) / static_cast<double>(out.n_neg);
  return out;
}

DelongResult delong_compare(const std::vector<double>& scores_a, const std::vector<double>& scores_b,
                            const std::vector<int>& labels) {
  if (scores_a.size() != scores_b.size()) {
    throw std::invalid_argument("delong_compare: score vectors differ in length");
  }
  const auto s = split_labels(scores_a.size(), labels);
  const auto a = components(scores_a, s);
  const auto b = components(scores_b, s);
  const double n1 = static_cast<double>(s.pos.size());
  const double n0 = static_cast<double>(s.neg.size());
  const double var10 = covariance(a.v10, a.v10) + covariance(b.v10, b.v10) - 2.0 * covariance(a.v10, b.v10);
  const double var01 = covariance(a.v01, a.v01) + covariance(b.v01, b.v01) - 2.0 * covariance(a.v01, b.v01);
  DelongResult out;
  out.auc_a = a.auc;
  out.auc_b = b.auc;
  out.var_diff = std::max(0.0, var10 / n1 + var01 / n0);
  const double diff = a.auc - b.auc;
  if (diff == 0.0) {
    out.z = 0.0;
    out.p = 1.0;
  } else if (out.var_diff == 0.0) {
    out.z = diff > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    out.p = 0.0;
  } else {
    out.z = diff / std::sqrt(out.var_diff);
    out.p = 2.0 * boost::math::cdf(boost::math::complement(boost::math::normal(), std::abs(out.z)));
  }
  return out;
}

}  // namespace emi::econ
