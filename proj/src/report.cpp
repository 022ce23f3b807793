#include "attnlens/report.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace attnlens {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::size_t parse_count(const std::string& key, const std::string& value, bool allow_zero) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    if (value.empty() || value[0] == '-' || value[0] == '+') throw std::invalid_argument(value);
    v = std::stoull(value, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != value.size() || (!allow_zero && v == 0)) {
    throw Error(ErrorKind::Usage, "config '" + key + "': expected a " + (allow_zero ? "non-negative" : "positive") +
                                      " integer, got '" + value + "'");
  }
  return static_cast<std::size_t>(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
  const auto v = ascii_lower(value);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(ErrorKind::Usage, "config '" + key + "': expected a boolean, got '" + value + "'");
}

std::string html_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string render_html(const RunConfig& cfg, const Corpus& corpus, const std::vector<AlignedSample>& aligned,
                        const RankReport& rank, const AttributionReport& attr, const StrataResult& strata,
                        const std::vector<std::size_t>& layers) {
  std::ostringstream h;
  h << "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>attnlens report</title>\n"
    << "<style>\nbody{font-family:sans-serif;margin:2em}\ntable{border-collapse:collapse}\n"
    << "td,th{border:1px solid #ccc;padding:2px 8px;text-align:right}\n"
    << "pre.heatmap{font-family:monospace;line-height:1.5;white-space:pre-wrap}\n"
    << ".tok{border-radius:2px}\n.caption{color:#a00;font-style:italic}\n</style>\n</head>\n<body>\n";
  h << "<h1>attnlens report</h1>\n<p>config hash <code>" << hex64(cfg.hash()) << "</code></p>\n";
  h << "<pre>" << html_escape(cfg.canonical()) << "</pre>\n";
  h << "<p>" << corpus.records.size() << " samples, task " << to_string(corpus.task) << ", language "
    << to_string(cfg.language) << ", repeated token ratio " << fixed6(rank.repeated_token_ratio) << " ("
    << rank.n_repeated_steps << " of " << rank.n_steps << " output steps)</p>\n";

  h << "<h2>Attention rank of copied tokens</h2>\n";
  if (rank.empty) h << "<p class=\"caption\">no output step has a matching input token</p>\n";
  h << "<table>\n<tr><th>layer</th><th>mean normalized rank</th><th>top-" << rank.k
    << " hit rate</th><th>observations</th></tr>\n";
  for (const auto& l : rank.layers) {
    h << "<tr><td>" << l.layer << "</td><td>" << (l.mean_normalized_rank ? fixed6(*l.mean_normalized_rank) : "")
      << "</td><td>" << (l.topk_hit_rate ? fixed6(*l.topk_hit_rate) : "") << "</td><td>" << l.n_observations
      << "</td></tr>\n";
  }
  h << "</table>\n";

  h << "<h2>Category attribution (layer average)</h2>\n<table>\n"
    << "<tr><th>category</th><th>population</th><th>per token</th><th>normalized %</th></tr>\n";
  for (const auto c : kAllCategories) {
    const auto i = category_index(c);
    h << "<tr><td>" << to_string(c) << "</td><td>" << attr.average.population[i] << "</td><td>"
      << fixed6(attr.average.per_token[i]) << "</td><td>" << fixed6(attr.average.normalized_pct[i]) << "</td></tr>\n";
  }
  h << "</table>\n<table>\n<tr><th>group</th><th>normalized %</th></tr>\n"
    << "<tr><td>Naming</td><td>" << fixed6(attr.high_level.naming_pct) << "</td></tr>\n"
    << "<tr><td>Structural</td><td>" << fixed6(attr.high_level.structural_pct) << "</td></tr>\n"
    << "<tr><td>Others</td><td>" << fixed6(attr.high_level.others_pct) << "</td></tr>\n</table>\n";

  h << "<h2>Difficulty and accuracy quadrants</h2>\n<table>\n<tr><th>quadrant</th><th>count</th><th>ratio</th></tr>\n";
  for (const auto q : kAllQuadrants) {
    h << "<tr><td>" << to_string(q) << "</td><td>" << strata.strata.count(q) << "</td><td>"
      << fixed6(static_cast<double>(strata.strata.count(q)) / static_cast<double>(strata.strata.rows.size()))
      << "</td></tr>\n";
  }
  h << "</table>\n";
  if (strata.easy_low) {
    const auto d = category_attention_delta(strata.whole, *strata.easy_low);
    h << "<p>EasyLow minus all: Naming " << fixed6(d.naming_pct) << ", Structural " << fixed6(d.structural_pct)
      << ", Others " << fixed6(d.others_pct) << "</p>\n";
  } else {
    h << "<p class=\"caption\">EasyLow attention delta unavailable (empty quadrant)</p>\n";
  }

  const std::size_t layer = layers.back();
  h << "<h2>Heatmaps (layer " << layer << ", last generated token)</h2>\n";
  const std::size_t shown = std::min(cfg.heatmap_samples, aligned.size());
  for (std::size_t i = 0; i < shown; ++i) {
    const auto& a = aligned[i];
    h << "<h3>" << html_escape(a.record_id) << " <small>(" << to_string(strata.strata.rows[i].quadrant)
      << ")</small></h3>\n";
    if (a.num_steps() == 0) {
      h << "<p class=\"caption\">no generated tokens</p>\n";
      continue;
    }
    h << render_heatmap(a, layer, a.num_steps() - 1);
  }
  if (shown < aligned.size()) h << "<p>" << aligned.size() - shown << " more samples not rendered</p>\n";
  h << "</body>\n</html>\n";
  return h.str();
}

std::string delta_row(const std::string& group, double whole, std::optional<double> subset) {
  std::string out = group + "," + fixed6(whole) + ",";
  if (subset) {
    out += fixed6(*subset) + "," + fixed6(*subset - whole);
  } else {
    out += "empty,empty";
  }
  return out + "\n";
}

}  // namespace

LayerSelection LayerSelection::parse(std::string_view text) {
  LayerSelection sel;
  const auto t = trim(text);
  if (t == "all") return sel;
  if (t == "last-3") {
    sel.mode = Mode::Last3;
    return sel;
  }
  sel.mode = Mode::List;
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) sel.list.push_back(parse_count("layers", trim(item), true));
  if (sel.list.empty()) throw Error(ErrorKind::Usage, "layers: expected all, last-3 or a list of indices");
  return sel;
}

std::string LayerSelection::to_string() const {
  if (mode == Mode::All) return "all";
  if (mode == Mode::Last3) return "last-3";
  std::string out;
  for (const auto l : list) out += (out.empty() ? "" : ",") + std::to_string(l);
  return out;
}

std::vector<std::size_t> LayerSelection::resolve(std::size_t num_layers) const {
  std::vector<std::size_t> out;
  if (mode == Mode::List) {
    for (const auto l : list) {
      if (l >= num_layers) {
        throw Error(ErrorKind::Usage,
                    "layer " + std::to_string(l) + " out of range [0, " + std::to_string(num_layers) + ")");
      }
    }
    return list;
  }
  const std::size_t first = mode == Mode::Last3 && num_layers > 3 ? num_layers - 3 : 0;
  for (std::size_t l = first; l < num_layers; ++l) out.push_back(l);
  return out;
}

std::string RunConfig::canonical() const {
  std::ostringstream s;
  s << "task = " << to_string(task) << "\nlanguage = " << to_string(language) << "\nlayers = " << layers.to_string()
    << "\nk = " << k << "\nbins = " << bins << "\nstrict = " << (strict ? "true" : "false")
    << "\nsample_weighted = " << (sample_weighted ? "true" : "false")
    << "\nper_sample = " << (per_sample ? "true" : "false")
    << "\ndistance = " << (distance == DistanceUnit::Tokens ? "tokens" : "chars")
    << "\nheatmap_samples = " << heatmap_samples << "\n";
  return s.str();
}

std::uint64_t RunConfig::hash() const {
  return fnv1a64(canonical());
}

std::map<std::string, std::string> parse_config_text(std::string_view text) {
  std::map<std::string, std::string> out;
  std::stringstream ss{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::Usage, "config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw Error(ErrorKind::Usage, "config line " + std::to_string(line_no) + ": empty key");
    out[key] = trim(std::string_view(line).substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Usage, "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "task") {
    cfg.task = parse_task(value);
  } else if (key == "language" || key == "lang") {
    cfg.language = parse_language(value);
  } else if (key == "dump") {
    cfg.dump_path = value;
  } else if (key == "out") {
    cfg.out_dir = value;
  } else if (key == "layers") {
    cfg.layers = LayerSelection::parse(value);
  } else if (key == "k") {
    cfg.k = parse_count(key, value, false);
  } else if (key == "bins") {
    cfg.bins = parse_count(key, value, false);
  } else if (key == "strict") {
    cfg.strict = parse_bool(key, value);
  } else if (key == "sample_weighted") {
    cfg.sample_weighted = parse_bool(key, value);
  } else if (key == "per_sample") {
    cfg.per_sample = parse_bool(key, value);
  } else if (key == "distance") {
    if (value == "chars") {
      cfg.distance = DistanceUnit::Characters;
    } else if (value == "tokens") {
      cfg.distance = DistanceUnit::Tokens;
    } else {
      throw Error(ErrorKind::Usage, "config 'distance': expected chars or tokens, got '" + value + "'");
    }
  } else if (key == "heatmap_samples") {
    cfg.heatmap_samples = parse_count(key, value, true);
  } else if (key == "workers") {
    parse_count(key, value, false);  // consumed by the CLI
  } else {
    throw Error(ErrorKind::Usage, "unknown config key '" + key + "'");
  }
}

std::vector<std::string> check_corpus(const Corpus& corpus, const std::optional<CorpusMeta>& meta, bool strict) {
  std::vector<std::string> warnings;
  std::vector<std::string> errors;
  for (const auto& r : corpus.records) {
    for (const auto& v : validate_record(r)) {
      std::string msg = "record '" + r.id + "': " + std::string(to_string(v.kind));
      if (v.layer) msg += " layer " + std::to_string(*v.layer);
      if (v.step) msg += " step " + std::to_string(*v.step);
      if (v.index) msg += " index " + std::to_string(*v.index);
      msg += ": " + v.message;
      if (v.severity == Severity::Error || strict) {
        errors.push_back(std::move(msg));
      } else {
        warnings.push_back(std::move(msg));
      }
    }
    if (meta && meta->num_layers != 0 && r.num_layers() != meta->num_layers) {
      errors.push_back("record '" + r.id + "': " + std::to_string(r.num_layers()) + " layers but the sidecar says " +
                       std::to_string(meta->num_layers));
    }
    if (r.num_layers() != corpus.records.front().num_layers()) {
      errors.push_back("record '" + r.id + "': " + std::to_string(r.num_layers()) +
                       " layers, differs from the first record");
    }
  }
  if (!errors.empty()) {
    throw Error(ErrorKind::Validation,
                errors.front() + (errors.size() > 1 ? " (and " + std::to_string(errors.size() - 1) + " more)" : ""));
  }
  return warnings;
}

StrataResult stratify(const std::vector<SampleMetrics>& metrics, const std::vector<AlignedSample>& aligned, Task task,
                      std::size_t bins, const std::vector<std::size_t>& layers, bool per_sample) {
  StrataResult out;
  out.strata = label_quadrants(metrics, task);
  for (const auto m : kAllMetrics) {
    out.histograms.emplace_back(metric_name(m, task), distribution_compare(m, out.strata, Quadrant::EasyLow, bins));
  }
  const auto whole = attribution_report(aligned, layers, per_sample);
  out.whole = whole.high_level;
  out.whole_profile = whole.average;

  std::vector<AlignedSample> subset;
  for (const auto& row : out.strata.rows) {
    if (row.quadrant != Quadrant::EasyLow) continue;
    const auto it = std::find_if(aligned.begin(), aligned.end(),
                                 [&](const AlignedSample& a) { return a.record_id == row.id; });
    if (it == aligned.end()) {
      throw Error(ErrorKind::Alignment, "no aligned sample for record '" + row.id + "'");
    }
    subset.push_back(*it);
  }
  if (!subset.empty()) {
    try {
      const auto sub = attribution_report(subset, layers, per_sample);
      out.easy_low = sub.high_level;
      out.easy_low_profile = sub.average;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Degenerate) throw;
    }
  }
  return out;
}

void add_strata_artifacts(Artifacts& files, const StrataResult& s, const std::string& prefix) {
  std::ostringstream labels;
  write_labels_csv(s.strata, labels);
  files[prefix + "labels.csv"] = labels.str();
  std::ostringstream quadrants;
  write_quadrants_csv(s.strata, quadrants);
  files[prefix + "quadrants.csv"] = quadrants.str();
  for (const auto& [name, hist] : s.histograms) {
    std::ostringstream csv;
    write_histogram_csv(hist, csv);
    files[prefix + "histograms/" + name + ".csv"] = csv.str();
  }
  std::string deltas = "group,whole_pct,subset_pct,delta\n";
  const auto& sub = s.easy_low;
  deltas += delta_row("Naming", s.whole.naming_pct, sub ? std::optional(sub->naming_pct) : std::nullopt);
  deltas += delta_row("Structural", s.whole.structural_pct, sub ? std::optional(sub->structural_pct) : std::nullopt);
  deltas += delta_row("Others", s.whole.others_pct, sub ? std::optional(sub->others_pct) : std::nullopt);
  for (const auto c : kAllCategories) {
    const auto i = category_index(c);
    deltas += delta_row(std::string(to_string(c)), s.whole_profile.normalized_pct[i],
                        s.easy_low_profile ? std::optional(s.easy_low_profile->normalized_pct[i]) : std::nullopt);
  }
  files[prefix + "deltas.csv"] = deltas;
}

std::string metrics_csv(const std::vector<SampleMetrics>& metrics, Task task) {
  std::ostringstream out;
  const bool overlap = task == Task::CDG;
  out << "id,bleu4_smoothed," << (overlap ? "overlap" : "levenshtein")
      << ",n_tokens,cyclomatic,nested_block_depth,n_variables,exact_match\n";
  for (const auto& m : metrics) {
    out << m.id << ',' << fixed6(m.bleu4_smoothed) << ','
        << (overlap ? fixed6(m.difficulty) : std::to_string(static_cast<std::size_t>(m.difficulty))) << ','
        << m.complexity.n_tokens << ',' << m.complexity.cyclomatic << ',' << m.complexity.nested_block_depth << ','
        << m.complexity.n_variables << ',' << (m.exact_match ? "true" : "false") << '\n';
  }
  return out.str();
}

void write_artifacts(const Artifacts& files, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  for (const auto& [rel, content] : files) {
    const fs::path path = fs::path(dir) / rel;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  }
}

std::vector<double> heatmap_opacities(std::span<const double> row) {
  std::vector<double> out(row.size(), 0.0);
  if (row.empty()) return out;
  const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
  if (!(*hi > *lo)) return out;
  for (std::size_t i = 0; i < row.size(); ++i) out[i] = (row[i] - *lo) / (*hi - *lo);
  return out;
}

std::string render_heatmap(const AlignedSample& sample, std::size_t layer, std::size_t step) {
  if (layer >= sample.num_layers() || step >= sample.num_steps()) {
    throw Error(ErrorKind::Usage, "heatmap: layer " + std::to_string(layer) + " step " + std::to_string(step) +
                                      " out of range for sample '" + sample.record_id + "'");
  }
  const auto row = sample.attention.row(layer, step);
  const auto opacity = heatmap_opacities(row);
  std::ostringstream h;
  h << "<figure class=\"heatmap\" data-sample=\"" << html_escape(sample.record_id) << "\" data-layer=\"" << layer
    << "\" data-step=\"" << step << "\">\n<pre class=\"heatmap\">";
  std::size_t pos = 0;
  for (std::size_t t = 0; t < sample.code_tokens.size(); ++t) {
    const auto& tok = sample.code_tokens[t];
    if (tok.char_start > pos) h << html_escape(std::string_view(sample.source_text).substr(pos, tok.char_start - pos));
    h << "<span class=\"tok\" title=\"" << to_string(tok.category) << " " << fixed6(row[t])
      << "\" style=\"background-color:rgba(255,0,0," << fixed6(opacity[t]) << ")\">" << html_escape(tok.text)
      << "</span>";
    pos = tok.char_end;
  }
  if (pos < sample.source_text.size()) h << html_escape(std::string_view(sample.source_text).substr(pos));
  h << "</pre>\n<figcaption>step " << step << " &rarr; <code>"
    << html_escape(step < sample.output_steps.size() ? sample.output_steps[step] : "") << "</code>";
  if (std::all_of(opacity.begin(), opacity.end(), [](double v) { return v == 0.0; })) {
    h << " <span class=\"caption\">constant attention row: min-max normalization is degenerate, all opacities 0</span>";
  }
  h << "</figcaption>\n</figure>\n";
  return h.str();
}

PipelineResult compute_pipeline(const RunConfig& cfg) {
  PipelineResult result;
  const auto corpus = read_dump_file(cfg.dump_path);
  if (corpus.records.empty()) throw Error(ErrorKind::Empty, "dump '" + cfg.dump_path + "' has no records");
  if (corpus.task != cfg.task) {
    throw Error(ErrorKind::Usage, "dump task is " + std::string(to_string(corpus.task)) + " but --task is " +
                                      std::string(to_string(cfg.task)));
  }
  result.warnings = check_corpus(corpus, read_meta_sidecar(cfg.dump_path), cfg.strict);

  const auto aligned = align_corpus(corpus, cfg.language);
  const auto layers = cfg.layers.resolve(aligned.front().num_layers());
  const auto rank = select_layers(rank_report(aligned, cfg.k, cfg.sample_weighted), layers);
  const auto attr = attribution_report(aligned, layers, cfg.per_sample);
  const auto metrics = corpus_metrics(corpus, cfg.language, cfg.distance);
  const auto strata = stratify(metrics, aligned, cfg.task, cfg.bins, layers, cfg.per_sample);

  std::ostringstream rank_csv;
  write_rank_csv(rank, rank_csv);
  result.files["rank.csv"] = rank_csv.str();
  std::ostringstream cat_csv;
  write_categories_csv(attr, cat_csv);
  result.files["categories.csv"] = cat_csv.str();
  result.files["metrics.csv"] = metrics_csv(metrics, cfg.task);
  add_strata_artifacts(result.files, strata, "strata/");
  result.files["report.html"] = render_html(cfg, corpus, aligned, rank, attr, strata, layers);
  return result;
}

PipelineResult run_pipeline(const RunConfig& cfg) {
  auto result = compute_pipeline(cfg);
  write_artifacts(result.files, cfg.out_dir);
  return result;
}

}  // namespace attnlens
