#include "attnlens/attribution.hpp"

#include <ostream>

#include "attnlens/parallel.hpp"

namespace attnlens {

namespace {

void add_into(Accumulation& total, const Accumulation& part) {
  for (std::size_t l = 0; l < part.raw_mass.size(); ++l) {
    for (std::size_t c = 0; c < kNumCategories; ++c) total.raw_mass[l][c] += part.raw_mass[l][c];
    total.orphan_mass[l] += part.orphan_mass[l];
  }
  for (std::size_t c = 0; c < kNumCategories; ++c) total.population[c] += part.population[c];
  total.n_samples += part.n_samples;
}

void write_profile_rows(std::ostream& out, const std::string& layer, const CategoryProfile& p) {
  for (const auto c : kAllCategories) {
    const auto i = category_index(c);
    out << layer << ',' << to_string(c) << ',' << fixed6(p.raw_mass[i]) << ',' << p.population[i] << ','
        << fixed6(p.per_token[i]) << ',' << fixed6(p.normalized_pct[i]) << '\n';
  }
}

std::vector<std::size_t> all_layers(std::size_t n) {
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = i;
  return out;
}

}  // namespace

Accumulation accumulate_sample(const AlignedSample& sample) {
  Accumulation acc;
  const std::size_t layers = sample.num_layers();
  acc.raw_mass.assign(layers, CategoryValues{});
  acc.orphan_mass.assign(layers, 0.0);
  acc.n_samples = 1;
  for (const auto& t : sample.code_tokens) ++acc.population[category_index(t.category)];
  for (std::size_t l = 0; l < layers; ++l) {
    for (std::size_t s = 0; s < sample.num_steps(); ++s) {
      const auto row = sample.attention.row(l, s);
      for (std::size_t t = 0; t < row.size(); ++t) {
        acc.raw_mass[l][category_index(sample.code_tokens[t].category)] += row[t];
      }
      acc.orphan_mass[l] += sample.orphan(l, s);
    }
  }
  return acc;
}

Accumulation accumulate(const std::vector<AlignedSample>& aligned) {
  Accumulation total;
  if (aligned.empty()) return total;
  const std::size_t layers = aligned.front().num_layers();
  for (const auto& a : aligned) {
    if (a.num_layers() != layers) {
      throw Error(ErrorKind::Dimension, "sample '" + a.record_id + "' has " + std::to_string(a.num_layers()) +
                                            " layers, expected " + std::to_string(layers));
    }
  }
  std::vector<Accumulation> parts(aligned.size());
  parallel_for(aligned.size(), [&](std::size_t i) { parts[i] = accumulate_sample(aligned[i]); });
  total.raw_mass.assign(layers, CategoryValues{});
  total.orphan_mass.assign(layers, 0.0);
  for (const auto& p : parts) add_into(total, p);
  return total;
}

CategoryProfile normalize(const CategoryValues& raw_mass, const CategoryCounts& population) {
  CategoryProfile p;
  p.raw_mass = raw_mass;
  p.population = population;
  double sum = 0.0;
  for (std::size_t c = 0; c < kNumCategories; ++c) {
    p.per_token[c] = population[c] == 0 ? 0.0 : raw_mass[c] / static_cast<double>(population[c]);
    sum += p.per_token[c];
  }
  if (!(sum > 0.0)) throw Error(ErrorKind::Degenerate, "attribution profile has no attention mass on any category");
  for (std::size_t c = 0; c < kNumCategories; ++c) p.normalized_pct[c] = 100.0 * p.per_token[c] / sum;
  return p;
}

HighLevelProfile rollup(const CategoryProfile& p) {
  const auto pct = [&](Category c) { return p.normalized_pct[category_index(c)]; };
  HighLevelProfile h;
  h.naming_pct = pct(Category::MethodName) + pct(Category::InputVariable) + pct(Category::LocalVariable);
  h.structural_pct = pct(Category::MethodCall) + pct(Category::TypeIdentifier) + pct(Category::LanguageKeyword);
  h.others_pct = pct(Category::Other);
  return h;
}

CategoryProfile layer_average(const std::vector<CategoryProfile>& per_layer) {
  if (per_layer.empty()) throw Error(ErrorKind::Empty, "layer_average needs at least one layer");
  CategoryProfile avg;
  avg.population = per_layer.front().population;
  const double n = static_cast<double>(per_layer.size());
  for (const auto& p : per_layer) {
    for (std::size_t c = 0; c < kNumCategories; ++c) {
      avg.raw_mass[c] += p.raw_mass[c] / n;
      avg.per_token[c] += p.per_token[c] / n;
      avg.normalized_pct[c] += p.normalized_pct[c] / n;
    }
  }
  double sum = 0.0;
  for (const double v : avg.normalized_pct) sum += v;
  if (!(sum > 0.0)) throw Error(ErrorKind::Degenerate, "layer average has no attention mass");
  for (auto& v : avg.normalized_pct) v = 100.0 * v / sum;
  return avg;
}

AttributionReport attribution_report(const std::vector<AlignedSample>& aligned, const std::vector<std::size_t>& layers,
                                     bool per_sample) {
  if (aligned.empty()) throw Error(ErrorKind::Empty, "attribution needs at least one aligned sample");
  AttributionReport report;
  report.per_sample = per_sample;
  const auto acc = accumulate(aligned);
  const std::size_t n_layers = acc.raw_mass.size();
  report.layers = layers.empty() ? all_layers(n_layers) : layers;
  for (const auto l : report.layers) {
    if (l >= n_layers) {
      throw Error(ErrorKind::Usage,
                  "layer " + std::to_string(l) + " out of range [0, " + std::to_string(n_layers) + ")");
    }
  }

  if (!per_sample) {
    for (const auto l : report.layers) {
      report.per_layer.push_back(normalize(acc.raw_mass[l], acc.population));
      report.orphan_mass.push_back(acc.orphan_mass[l]);
    }
  } else {
    std::vector<Accumulation> parts(aligned.size());
    parallel_for(aligned.size(), [&](std::size_t i) { parts[i] = accumulate_sample(aligned[i]); });
    for (const auto l : report.layers) {
      CategoryValues pct_sum{};
      std::size_t used = 0;
      for (const auto& part : parts) {
        CategoryProfile p;
        try {
          p = normalize(part.raw_mass[l], part.population);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::Degenerate) throw;
          continue;
        }
        for (std::size_t c = 0; c < kNumCategories; ++c) pct_sum[c] += p.normalized_pct[c];
        ++used;
      }
      if (used == 0) throw Error(ErrorKind::Degenerate, "no sample carries attention mass in layer " + std::to_string(l));
      auto profile = normalize(acc.raw_mass[l], acc.population);
      for (std::size_t c = 0; c < kNumCategories; ++c) {
        profile.normalized_pct[c] = pct_sum[c] / static_cast<double>(used);
      }
      report.per_layer.push_back(profile);
      report.orphan_mass.push_back(acc.orphan_mass[l]);
    }
  }
  report.average = layer_average(report.per_layer);
  report.high_level = rollup(report.average);
  return report;
}

void write_categories_csv(const AttributionReport& report, std::ostream& out) {
  out << "layer,category,raw_mass,population,per_token,normalized_pct\n";
  for (std::size_t i = 0; i < report.layers.size(); ++i) {
    write_profile_rows(out, std::to_string(report.layers[i]), report.per_layer[i]);
  }
  write_profile_rows(out, "avg", report.average);
}

}  // namespace attnlens
