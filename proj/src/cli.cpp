#include "proofmatch/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "proofmatch/baselines.hpp"
#include "proofmatch/checkpoint.hpp"
#include "proofmatch/corpus.hpp"
#include "proofmatch/error.hpp"
#include "proofmatch/eval.hpp"
#include "proofmatch/extract.hpp"
#include "proofmatch/stats.hpp"
#include "proofmatch/synth.hpp"
#include "proofmatch/views.hpp"

namespace proofmatch {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

void reject_unknown_keys(const nlohmann::json& object, std::initializer_list<std::string_view> known,
                         const std::string& where) {
  if (!object.is_object()) throw DataError(where + " must be a JSON object");
  for (const auto& [key, value] : object.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw DataError("unknown key \"" + key + "\" in " + where);
    }
  }
}

template <typename T>
void read_field(const nlohmann::json& object, const char* key, T& field) {
  if (const auto it = object.find(key); it != object.end()) {
    try {
      field = it->get<T>();
    } catch (const nlohmann::json::exception&) {
      throw DataError(std::string("config field \"") + key + "\" has the wrong type");
    }
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot open " + path.string() + " for writing");
  file << text;
  if (!file) throw DataError("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return buffer.str();
}

ordered_json report_json(const EvalReport& r) {
  ordered_json j;
  j["n"] = r.n;
  j["mrr"] = r.mrr;
  j["accuracy_local"] = r.accuracy_local;
  j["accuracy_global"] = r.accuracy_global;
  j["degraded_global"] = r.degraded_global;
  j["usage"] = {{"at_least_two", r.usage.at_least_two},
                {"exactly_one", r.usage.exactly_one},
                {"none", r.usage.none}};
  return j;
}

void emit(const ordered_json& j, const std::string& path, std::ostream& out) {
  const auto text = j.dump(2) + "\n";
  if (path.empty()) {
    out << text;
  } else {
    write_text(path, text);
  }
}

PairCorpus load_split_corpus(const std::string& corpus_path, const std::string& split_path) {
  return apply_split(load_pairs(corpus_path), load_split(split_path));
}

// --- subcommands -------------------------------------------------------------

struct ExtractArgs {
  std::string input, output;
  bool lang_filter = false;
  std::size_t min_len = 20, max_len = 500;
};

int run_extract(const ExtractArgs& a, std::ostream& err) {
  if (!fs::is_directory(a.input)) throw DataError(a.input + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(a.input)) {
    if (entry.is_regular_file() && entry.path().extension() == ".xml") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<StatementProofPair> all;
  std::size_t docs_with_pairs = 0, skipped_language = 0, failed = 0;
  for (const auto& file : files) {
    const auto doc_id = fs::relative(file, a.input).replace_extension().generic_string();
    std::vector<StatementProofPair> pairs;
    try {
      pairs = extract_document(read_text(file), doc_id);
    } catch (const DataError& e) {
      err << "warning: " << e.what() << "\n";
      ++failed;
      continue;
    }
    if (pairs.empty()) continue;
    if (a.lang_filter && stopword_ratio(pairs) < kEnglishStopwordThreshold) {
      ++skipped_language;
      continue;
    }
    ++docs_with_pairs;
    all.insert(all.end(), std::make_move_iterator(pairs.begin()),
               std::make_move_iterator(pairs.end()));
  }
  const std::size_t extracted = all.size();
  all = filter_pairs(std::move(all), a.min_len, a.max_len);
  save_pairs(all, a.output);
  err << "documents: " << files.size() << ", with pairs: " << docs_with_pairs
      << ", unparseable: " << failed << ", language-filtered: " << skipped_language
      << ", pairs extracted: " << extracted << ", kept after length filter: " << all.size() << "\n";
  return exit_code::kOk;
}

struct BaselineArgs {
  std::string method = "tfidf", mode = "both", corpus, split, report, set = "dev";
  std::size_t k = 500;
};

int run_baseline(const BaselineArgs& a, std::ostream& out) {
  const auto method = parse_baseline_method(a.method);
  const auto mode = parse_input_mode(a.mode);
  const auto corpus = load_split_corpus(a.corpus, a.split);
  const auto which = parse_split(a.set);
  const auto selected = corpus.select(which);
  if (selected.empty()) throw DataError("split \"" + a.set + "\" is empty");

  TfIdfModel model;
  if (method == BaselineMethod::TfIdf) {
    const auto train = corpus.select(Split::Train);
    std::vector<TokenSequence> docs;
    docs.reserve(2 * train.size());
    for (const auto* p : train) {
      docs.push_back(restrict_to(p->statement, mode));
      docs.push_back(restrict_to(p->proof, mode));
    }
    model = tfidf_fit(docs);
  }
  const auto statements = statements_of(selected);
  const auto proofs = proofs_of(selected);
  const BaselineScorer scorer(method, mode, statements, proofs, &model);
  const auto report = evaluate_rows(
      scorer.size(), [&](std::size_t i, std::span<double> row) { scorer.score_row(i, row); }, a.k);

  auto j = report_json(report);
  j["method"] = a.method;
  j["mode"] = a.mode;
  j["set"] = a.set;
  j["k"] = a.k;
  emit(j, a.report, out);
  return exit_code::kOk;
}

struct TrainArgs {
  std::string corpus, split, config, mode = "both", objective, out, log;
  std::optional<std::int64_t> seed;
};

int run_train(const TrainArgs& a, std::ostream& err) {
  ExperimentConfig config;
  if (!a.config.empty()) {
    try {
      config = parse_experiment_config(nlohmann::json::parse(read_text(a.config)));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(a.config + ": " + e.what());
    }
  }
  if (!a.objective.empty()) config.train.objective = parse_objective(a.objective);
  if (a.seed) config.train.seed = *a.seed;
  config.train.validate();
  const auto mode = parse_input_mode(a.mode);

  const auto corpus = load_split_corpus(a.corpus, a.split);
  const auto vocabulary = build_vocabulary(corpus, config.vocab_min_freq);
  config.encoder.vocab_size = vocabulary.size();

  const auto train_texts =
      model_texts(corpus.select(Split::Train), vocabulary, mode, config.encoder.max_len);
  const auto dev_texts =
      model_texts(corpus.select(Split::Dev), vocabulary, mode, config.encoder.max_len);

  Rng init_rng(static_cast<std::uint64_t>(config.train.seed) ^ 0x5851f42d4c957f2dULL);
  EncoderModel model(config.encoder, init_rng);

  std::ofstream log;
  if (!a.log.empty()) {
    log.open(a.log, std::ios::binary);
    if (!log) throw DataError("cannot open " + a.log + " for writing");
  }
  const auto on_epoch = [&](const EpochLog& e) {
    ordered_json line;
    line["epoch"] = e.epoch;
    line["step"] = e.step;
    line["loss"] = e.loss;
    if (config.train.objective == Objective::HybridGlobal) line["global_loss"] = e.global_loss;
    line["lr"] = e.lr;
    if (e.dev) line["dev"] = {{"mrr", e.dev->mrr}, {"accuracy", e.dev->accuracy}};
    if (log.is_open()) log << line.dump() << "\n";
    if (e.dev) {
      err << "epoch " << e.epoch << " loss " << e.loss << " dev mrr " << e.dev->mrr << " acc "
          << e.dev->accuracy << "\n";
    }
  };

  const auto result = train(std::move(model), train_texts, dev_texts, config.train, on_epoch);
  save_checkpoint(result.best, vocabulary, a.out);
  err << "best epoch " << result.best_epoch << " (" << to_string(config.train.selection_metric)
      << " " << result.best_metric << ") saved to " << a.out << "\n";
  return exit_code::kOk;
}

struct EvaluateArgs {
  std::string model, corpus, split, set = "dev", mode = "both", report;
  std::size_t k = 500;
};

int run_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const auto checkpoint = load_checkpoint(a.model);
  const auto mode = parse_input_mode(a.mode);
  const auto corpus = load_split_corpus(a.corpus, a.split);
  const auto selected = corpus.select(parse_split(a.set));
  if (selected.empty()) throw DataError("split \"" + a.set + "\" is empty");

  const auto& model = checkpoint.model;
  const auto texts =
      model_texts(selected, checkpoint.vocabulary, mode, model.config().max_len);
  const Matrix s = model.encode_all(texts.statements);
  const Matrix p = model.encode_all(texts.proofs);
  const auto report = evaluate_rows(
      texts.size(), [&](std::size_t i, std::span<double> row) { model.score_row(s, p, i, row); },
      a.k);

  auto j = report_json(report);
  j["mode"] = a.mode;
  j["set"] = a.set;
  j["k"] = a.k;
  emit(j, a.report, out);
  return exit_code::kOk;
}

}  // namespace

ExperimentConfig parse_experiment_config(const nlohmann::json& object) {
  ExperimentConfig config;
  reject_unknown_keys(object, {"encoder", "train", "vocab_min_freq"}, "config");
  read_field(object, "vocab_min_freq", config.vocab_min_freq);

  if (const auto it = object.find("encoder"); it != object.end()) {
    reject_unknown_keys(*it,
                        {"embed_dim", "layers", "model_dim", "heads", "key_dim", "ffn_dim",
                         "max_len", "dropout", "positional"},
                        "config.encoder");
    auto& e = config.encoder;
    read_field(*it, "embed_dim", e.embed_dim);
    read_field(*it, "layers", e.layers);
    read_field(*it, "model_dim", e.model_dim);
    read_field(*it, "heads", e.heads);
    read_field(*it, "key_dim", e.key_dim);
    read_field(*it, "ffn_dim", e.ffn_dim);
    read_field(*it, "max_len", e.max_len);
    read_field(*it, "dropout", e.dropout);
    read_field(*it, "positional", e.positional);
  }
  if (const auto it = object.find("train"); it != object.end()) {
    reject_unknown_keys(*it,
                        {"batch_size", "epochs", "lr", "lr_decay", "eval_every", "objective",
                         "seed", "selection_metric"},
                        "config.train");
    auto& t = config.train;
    read_field(*it, "batch_size", t.batch_size);
    read_field(*it, "epochs", t.epochs);
    read_field(*it, "lr", t.lr);
    read_field(*it, "lr_decay", t.lr_decay);
    read_field(*it, "eval_every", t.eval_every);
    read_field(*it, "seed", t.seed);
    std::string name;
    read_field(*it, "objective", name);
    if (!name.empty()) t.objective = parse_objective(name);
    name.clear();
    read_field(*it, "selection_metric", name);
    if (!name.empty()) t.selection_metric = parse_selection_metric(name);
  }
  return config;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Statement-proof matching: corpus tools, baselines, training and evaluation",
               "proofmatch"};
  app.require_subcommand(1);

  ExtractArgs extract;
  auto* extract_cmd = app.add_subcommand("extract", "Mine statement-proof pairs from XML files");
  extract_cmd->add_option("--input", extract.input, "Directory of .xml documents")->required();
  extract_cmd->add_option("--output", extract.output, "Output corpus (JSONL)")->required();
  extract_cmd->add_flag("--lang-filter", extract.lang_filter,
                        "Drop documents whose words are mostly not English stopwords");
  extract_cmd->add_option("--min-len", extract.min_len, "Minimum tokens per text");
  extract_cmd->add_option("--max-len", extract.max_len, "Maximum tokens per text");

  std::string split_corpus, split_out;
  std::int64_t split_seed = 0;
  auto* split_cmd = app.add_subcommand("split", "Shuffle and cut an 80/10/10 split");
  split_cmd->add_option("--corpus", split_corpus)->required();
  split_cmd->add_option("--seed", split_seed)->required();
  split_cmd->add_option("--out", split_out)->required();

  std::string stats_corpus, stats_report;
  auto* stats_cmd = app.add_subcommand("stats", "Token-count statistics of a corpus");
  stats_cmd->add_option("--corpus", stats_corpus)->required();
  stats_cmd->add_option("--report", stats_report, "Write JSON here instead of stdout");

  SynthOptions synth;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth_cmd->add_option("--pairs", synth.pairs)->required();
  synth_cmd->add_option("--vocab", synth.vocab_size);
  synth_cmd->add_option("--overlap", synth.overlap);
  synth_cmd->add_option("--seed", synth.seed);
  synth_cmd->add_option("--out", synth_out)->required();

  BaselineArgs baseline;
  auto* baseline_cmd = app.add_subcommand("baseline", "Score a split with Dice or TF-IDF");
  baseline_cmd->add_option("--method", baseline.method)->check(CLI::IsMember({"dice", "tfidf"}));
  baseline_cmd->add_option("--mode", baseline.mode)->check(CLI::IsMember({"both", "text", "math"}));
  baseline_cmd->add_option("--corpus", baseline.corpus)->required();
  baseline_cmd->add_option("--split", baseline.split)->required();
  baseline_cmd->add_option("--set", baseline.set)->check(CLI::IsMember({"dev", "test"}));
  baseline_cmd->add_option("--k", baseline.k);
  baseline_cmd->add_option("--report", baseline.report);

  TrainArgs train_args;
  std::int64_t train_seed = 0;
  auto* train_cmd = app.add_subcommand("train", "Train the self-attentive scorer");
  train_cmd->add_option("--corpus", train_args.corpus)->required();
  train_cmd->add_option("--split", train_args.split)->required();
  train_cmd->add_option("--config", train_args.config, "Experiment config (JSON)");
  train_cmd->add_option("--mode", train_args.mode)->check(CLI::IsMember({"both", "text", "math"}));
  train_cmd->add_option("--objective", train_args.objective)
      ->check(CLI::IsMember({"local", "hybrid"}));
  auto* seed_opt = train_cmd->add_option("--seed", train_seed, "Overrides train.seed");
  train_cmd->add_option("--out", train_args.out)->required();
  train_cmd->add_option("--log", train_args.log, "Training log (JSONL)");

  EvaluateArgs evaluate_args;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Evaluate a checkpoint on a split");
  evaluate_cmd->add_option("--model", evaluate_args.model)->required();
  evaluate_cmd->add_option("--corpus", evaluate_args.corpus)->required();
  evaluate_cmd->add_option("--split", evaluate_args.split)->required();
  evaluate_cmd->add_option("--set", evaluate_args.set)->check(CLI::IsMember({"dev", "test"}));
  evaluate_cmd->add_option("--mode", evaluate_args.mode)
      ->check(CLI::IsMember({"both", "text", "math"}));
  evaluate_cmd->add_option("--k", evaluate_args.k);
  evaluate_cmd->add_option("--report", evaluate_args.report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      return app.exit(e, out, err);
    }
    const auto parsed = app.get_subcommands();
    const CLI::App* scope = parsed.empty() ? &app : parsed.back();
    err << "error: " << e.what() << "\n\n" << scope->help();
    return exit_code::kUsage;
  }

  try {
    if (extract_cmd->parsed()) return run_extract(extract, err);
    if (split_cmd->parsed()) {
      save_split(shuffle_and_split(load_pairs(split_corpus), split_seed), split_out);
      return exit_code::kOk;
    }
    if (stats_cmd->parsed()) {
      emit(to_json(corpus_stats(load_pairs(stats_corpus))), stats_report, out);
      return exit_code::kOk;
    }
    if (synth_cmd->parsed()) {
      save_pairs(synthesize(synth), synth_out);
      return exit_code::kOk;
    }
    if (baseline_cmd->parsed()) return run_baseline(baseline, out);
    if (train_cmd->parsed()) {
      if (seed_opt->count() > 0) train_args.seed = train_seed;
      return run_train(train_args, err);
    }
    if (evaluate_cmd->parsed()) return run_evaluate(evaluate_args, out);
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kDiverged;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kData;
  }
  return exit_code::kUsage;
}

}  // namespace proofmatch
