// attnlens command-line entry point.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "attnlens/alignment.hpp"
#include "attnlens/attribution.hpp"
#include "attnlens/dump_format.hpp"
#include "attnlens/metrics.hpp"
#include "attnlens/parallel.hpp"
#include "attnlens/rank.hpp"
#include "attnlens/report.hpp"
#include "attnlens/stratifier.hpp"
#include "json.hpp"

using namespace attnlens;

namespace {

void print_error(std::string_view kind, std::string_view message) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  std::cerr << j.dump() << '\n';
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  auto out = open_out(path);
  out << content;
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
}

void warn_all(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

std::vector<std::size_t> resolve_layers(const std::string& spec, const std::vector<AlignedSample>& aligned) {
  if (aligned.empty()) return {};
  return LayerSelection::parse(spec).resolve(aligned.front().num_layers());
}

int cmd_validate(const std::string& dump, bool strict) {
  const auto corpus = read_dump_file(dump);
  const auto meta = read_meta_sidecar(dump);
  std::size_t errors = 0;
  std::size_t warnings = 0;
  auto opt = [](const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : std::string("-"); };
  for (const auto& r : corpus.records) {
    for (const auto& v : validate_record(r)) {
      const bool is_error = v.severity == Severity::Error || strict;
      (is_error ? errors : warnings) += 1;
      std::cout << r.id << '\t' << (is_error ? "error" : "warning") << '\t' << to_string(v.kind) << '\t'
                << opt(v.layer) << '\t' << opt(v.step) << '\t' << opt(v.index) << '\t' << v.message << '\n';
    }
    if (meta && meta->num_layers != 0 && r.num_layers() != meta->num_layers) {
      ++errors;
      std::cout << r.id << "\terror\tlayer_count\t-\t-\t-\t" << r.num_layers() << " layers, sidecar says "
                << meta->num_layers << '\n';
    }
  }
  std::cout << corpus.records.size() << " records, " << errors << " errors, " << warnings << " warnings\n";
  return errors == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attention analysis for encoder-decoder code models"};
  app.require_subcommand(1);
  int workers = 0;
  app.add_option("--workers", workers, "Parallel workers (default: ATTNLENS_WORKERS or all cores)")
      ->check(CLI::PositiveNumber);

  std::string dump;
  std::string aligned_path;
  std::string out;
  std::string lang;
  std::string task;
  std::string layers = "all";
  std::size_t k = 3;
  std::size_t bins = 10;
  bool strict = false;
  bool sample_weighted = false;
  bool per_sample = false;
  std::string distance = "chars";

  auto* validate = app.add_subcommand("validate", "Check a dump against the record invariants");
  validate->add_option("--dump", dump, "Dump file (.jsonl)")->required();
  validate->add_flag("--strict", strict, "Treat row-sum and range warnings as errors");

  auto* align = app.add_subcommand("align", "Aggregate subword attention onto code tokens");
  align->add_option("--dump", dump, "Dump file (.jsonl)")->required();
  align->add_option("--lang", lang, "Source language: java, python, csharp")->required();
  align->add_option("--out", out, "Aligned output (.jsonl)")->required();
  align->add_flag("--strict", strict, "Fail on validation warnings");

  auto* rank = app.add_subcommand("rank", "Per-layer attention rank of copied tokens");
  rank->add_option("--aligned", aligned_path, "Aligned file from `align`")->required();
  rank->add_option("--k", k, "Top-k for the hit rate")->check(CLI::PositiveNumber);
  rank->add_option("--out", out, "CSV output")->required();
  rank->add_option("--layers", layers, "all, last-3 or a comma-separated list");
  rank->add_flag("--sample-weighted", sample_weighted, "Average within each sample before across samples");

  auto* attribution = app.add_subcommand("attribution", "Attention mass per token category");
  attribution->add_option("--aligned", aligned_path, "Aligned file from `align`")->required();
  attribution->add_option("--out", out, "CSV output")->required();
  attribution->add_option("--layers", layers, "all, last-3 or a comma-separated list");
  attribution->add_flag("--per-sample", per_sample, "Normalize each sample before averaging");

  auto* metrics = app.add_subcommand("metrics", "BLEU, difficulty and complexity per sample");
  metrics->add_option("--dump", dump, "Dump file (.jsonl)")->required();
  metrics->add_option("--lang", lang, "Source language")->required();
  metrics->add_option("--out", out, "CSV output")->required();
  metrics->add_option("--distance", distance, "Levenshtein unit: chars or tokens")
      ->check(CLI::IsMember({"chars", "tokens"}));

  auto* stratify = app.add_subcommand("stratify", "Difficulty/accuracy quadrants and distributions");
  stratify->add_option("--dump", dump, "Dump file (.jsonl)")->required();
  stratify->add_option("--aligned", aligned_path, "Aligned file from `align`")->required();
  stratify->add_option("--lang", lang, "Source language")->required();
  stratify->add_option("--task", task, "CDG, CR or CT")->required();
  stratify->add_option("--out", out, "Output directory")->required();
  stratify->add_option("--bins", bins, "Histogram bins")->check(CLI::PositiveNumber);
  stratify->add_option("--layers", layers, "all, last-3 or a comma-separated list");
  stratify->add_flag("--per-sample", per_sample, "Normalize attribution per sample");
  stratify->add_option("--distance", distance, "Levenshtein unit: chars or tokens")
      ->check(CLI::IsMember({"chars", "tokens"}));

  std::string config_path;
  std::size_t heatmap_samples = 20;
  auto* report = app.add_subcommand("report", "Run the whole pipeline");
  report->add_option("--config", config_path, "Config file of `key = value` lines");
  report->add_option("--dump", dump, "Dump file (.jsonl)");
  report->add_option("--lang", lang, "Source language");
  report->add_option("--task", task, "CDG, CR or CT");
  report->add_option("--out", out, "Output directory");
  report->add_option("--layers", layers, "all, last-3 or a comma-separated list");
  report->add_option("--k", k, "Top-k for the hit rate")->check(CLI::PositiveNumber);
  report->add_option("--bins", bins, "Histogram bins")->check(CLI::PositiveNumber);
  report->add_flag("--strict", strict, "Fail on validation warnings");
  report->add_flag("--sample-weighted", sample_weighted, "Rank means per sample first");
  report->add_flag("--per-sample", per_sample, "Attribution normalized per sample first");
  report->add_option("--distance", distance, "Levenshtein unit: chars or tokens")
      ->check(CLI::IsMember({"chars", "tokens"}));
  report->add_option("--heatmap-samples", heatmap_samples, "Samples rendered as heatmaps");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }

  try {
    if (const auto env = workers_from_env()) set_worker_count(*env);
    if (workers > 0) set_worker_count(workers);

    if (validate->parsed()) return cmd_validate(dump, strict);

    if (align->parsed()) {
      const auto language = parse_language(lang);
      const auto corpus = read_dump_file(dump);
      warn_all(check_corpus(corpus, read_meta_sidecar(dump), strict));
      const auto aligned = align_corpus(corpus, language);
      std::ostringstream buf;
      write_aligned(aligned, buf);
      write_file(out, buf.str());
      return 0;
    }

    if (rank->parsed()) {
      const auto aligned = read_aligned_file(aligned_path);
      const auto sel = resolve_layers(layers, aligned);
      auto rep = select_layers(rank_report(aligned, k, sample_weighted), sel);
      if (rep.empty) std::cerr << "warning: empty rank report: no output step matches an input token\n";
      std::ostringstream buf;
      write_rank_csv(rep, buf);
      write_file(out, buf.str());
      return 0;
    }

    if (attribution->parsed()) {
      const auto aligned = read_aligned_file(aligned_path);
      const auto rep = attribution_report(aligned, resolve_layers(layers, aligned), per_sample);
      std::ostringstream buf;
      write_categories_csv(rep, buf);
      write_file(out, buf.str());
      return 0;
    }

    const auto unit = distance == "tokens" ? DistanceUnit::Tokens : DistanceUnit::Characters;

    if (metrics->parsed()) {
      const auto language = parse_language(lang);
      const auto corpus = read_dump_file(dump);
      write_file(out, metrics_csv(corpus_metrics(corpus, language, unit), corpus.task));
      return 0;
    }

    if (stratify->parsed()) {
      const auto language = parse_language(lang);
      const auto t = parse_task(task);
      const auto corpus = read_dump_file(dump);
      if (corpus.task != t) {
        throw Error(ErrorKind::Usage, "dump task is " + std::string(to_string(corpus.task)) + " but --task is " + task);
      }
      const auto aligned = read_aligned_file(aligned_path);
      const auto m = corpus_metrics(corpus, language, unit);
      const auto result = attnlens::stratify(m, aligned, t, bins, resolve_layers(layers, aligned), per_sample);
      Artifacts files;
      add_strata_artifacts(files, result, "");
      write_artifacts(files, out);
      return 0;
    }

    if (report->parsed()) {
      std::map<std::string, std::string> settings;
      if (!config_path.empty()) settings = read_config_file(config_path);
      auto flag = [&](const char* name, const std::string& key, const std::string& value) {
        if (report->count(name) > 0) settings[key] = value;
      };
      flag("--dump", "dump", dump);
      flag("--lang", "language", lang);
      flag("--task", "task", task);
      flag("--out", "out", out);
      flag("--layers", "layers", layers);
      flag("--k", "k", std::to_string(k));
      flag("--bins", "bins", std::to_string(bins));
      flag("--strict", "strict", strict ? "true" : "false");
      flag("--sample-weighted", "sample_weighted", sample_weighted ? "true" : "false");
      flag("--per-sample", "per_sample", per_sample ? "true" : "false");
      flag("--distance", "distance", distance);
      flag("--heatmap-samples", "heatmap_samples", std::to_string(heatmap_samples));
      if (settings.count("language") && settings.count("lang")) settings.erase("lang");
      for (const char* key : {"dump", "out", "task"}) {
        if (!settings.count(key)) throw Error(ErrorKind::Usage, std::string("report: missing --") + key);
      }
      if (!settings.count("language") && !settings.count("lang")) {
        throw Error(ErrorKind::Usage, "report: missing --lang");
      }
      RunConfig cfg;
      for (const auto& [key, value] : settings) apply_config_value(cfg, key, value);
      if (workers == 0 && settings.count("workers")) {
        set_worker_count(std::stoi(settings.at("workers")));
      }
      warn_all(run_pipeline(cfg).warnings);
      return 0;
    }
  } catch (const Error& e) {
    print_error(to_string(e.kind()), e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
  return 0;
}
