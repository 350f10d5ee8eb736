// Copyright 2026 The debcse Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "debcse/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>

#include "json.hpp"

#include "debcse/analysis.hpp"
#include "debcse/corpus.hpp"
#include "debcse/embedding_file.hpp"
#include "debcse/encoder.hpp"
#include "debcse/error.hpp"
#include "debcse/log.hpp"
#include "debcse/negative_miner.hpp"
#include "debcse/parallel.hpp"
#include "debcse/positive_miner.hpp"
#include "debcse/records.hpp"
#include "debcse/rng.hpp"
#include "debcse/sampling.hpp"
#include "debcse/trainer.hpp"

namespace debcse::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  fs::path out;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

struct EncoderSource {
  fs::path path;  // checkpoint base; empty = fresh init
  std::size_t dim = 64;
};

struct SurfaceFlags {
  std::string unit = "token";
  bool length_normalized = false;

  SurfaceOptions options() const {
    SurfaceOptions s;
    s.granularity = unit == "char" ? EditGranularity::kCharacter : EditGranularity::kToken;
    s.length_normalized = length_normalized;
    return s;
  }
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--out", c.out, "Fresh run directory for outputs")->required();
  sub->add_option("--seed", c.seed, "Base seed");
  sub->add_option("--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber);
}

void add_encoder(CLI::App* sub, EncoderSource& e) {
  sub->add_option("--encoder", e.path, "Encoder checkpoint base (<base>.debc + <base>.json)");
  sub->add_option("--embed-dim", e.dim, "Dimension of a freshly initialised encoder")->check(CLI::PositiveNumber);
}

void add_surface(CLI::App* sub, SurfaceFlags& s) {
  sub->add_option("--edit-unit", s.unit, "Edit distance granularity")->check(CLI::IsMember({"token", "char"}));
  sub->add_flag("--length-normalized", s.length_normalized, "Divide edit distances by the longer length");
}

void add_gen(CLI::App* sub, PositiveGenConfig& g) {
  sub->add_option("--candidates-per-anchor", g.candidates_per_anchor, "Rule-based candidates per anchor (G)");
  sub->add_option("--inject-min", g.inject_min);
  sub->add_option("--inject-max", g.inject_max);
  sub->add_option("--mask-min", g.mask_min);
  sub->add_option("--mask-max", g.mask_max);
  sub->add_option("--inject-prob", g.inject_probability, "Probability that a candidate is an injection edit");
  sub->add_option("--highfreq-vocab", g.highfreq_vocab_size, "Size of the high-frequency word list");
  sub->add_option("--mask-token", g.mask_token);
  sub->add_option("--max-retries", g.max_retries);
}

std::map<std::string, std::string> capture_config(const CLI::App* sub) {
  std::map<std::string, std::string> out;
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help") continue;
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
      if (opt->get_expected_max() == 0) value = "true";
    } else {
      value = opt->get_default_str();
      if (opt->get_expected_max() == 0) value = "false";
    }
    out[name] = value;
  }
  return out;
}

// True when the directory was created here.
bool prepare_out(const fs::path& dir) {
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir) || !fs::is_empty(dir)) {
      throw UsageError("output directory " + dir.string() + " exists and is not empty");
    }
    return false;
  }
  fs::create_directories(dir);
  return true;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

void write_ids(const fs::path& path, const std::vector<SentenceId>& ids) {
  std::string text;
  for (SentenceId id : ids) text += std::to_string(id) + "\n";
  write_text(path, text);
}

fs::path sidecar_for(const fs::path& embeddings, const fs::path& corpus) {
  if (!corpus.empty()) return corpus;
  fs::path p = embeddings;
  return p.replace_extension(".txt");
}

class Run {
 public:
  Run(std::string name, const CLI::App* sub, const Common& common) {
    manifest_.subcommand = std::move(name);
    manifest_.config = capture_config(sub);
    manifest_.seed = common.seed;
    manifest_.started_at = utc_now();
    dir_ = common.out;
  }

  const fs::path& dir() const { return dir_; }
  fs::path operator/(const std::string& name) const { return dir_ / name; }

  /// Records the digest of an input; call before reading it.
  const fs::path& input(const fs::path& path) {
    manifest_.input_digests[path.string()] = sha256_file(path);
    return path;
  }
  void note(const std::string& key, const std::string& value) { manifest_.notes[key] = value; }

  void finish() {
    manifest_.finished_at = utc_now();
    write_manifest(manifest_, dir_);
  }

 private:
  RunManifest manifest_;
  fs::path dir_;
};

EncoderParams resolve_encoder(Run& run, const EncoderSource& src, const Corpus& corpus, std::uint64_t seed) {
  if (!src.path.empty()) {
    fs::path debc = src.path;
    debc += ".debc";
    fs::path json = src.path;
    json += ".json";
    run.input(debc);
    run.input(json);
    run.note("encoder", "checkpoint " + src.path.string());
    return load_encoder(src.path);
  }
  EncoderInit init;
  init.dim = src.dim;
  init.seed = seed;
  run.note("encoder", "fresh init, dim " + std::to_string(src.dim) + ", seed " + std::to_string(seed));
  return init_encoder(corpus, init);
}

EmbeddingSource toy_source(const EncoderParams& params) {
  return [&params](const Tokens& tokens) {
    const Eigen::VectorXd v = encode(params, tokens);
    return std::vector<double>(v.data(), v.data() + v.size());
  };
}

std::pair<Corpus, EmbeddingMatrix> load_aligned(Run& run, const fs::path& embeddings, const fs::path& corpus_flag) {
  const fs::path corpus_path = sidecar_for(embeddings, corpus_flag);
  Corpus corpus = load_sidecar(run.input(corpus_path));
  EmbeddingMatrix emb = read_embeddings(run.input(embeddings));
  if (emb.count() != corpus.size()) {
    throw DataError("embedding rows (" + std::to_string(emb.count()) + ") do not match corpus sentences (" +
                    std::to_string(corpus.size()) + ")");
  }
  return {std::move(corpus), std::move(emb)};
}

std::vector<double> parse_lambda_list(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::size_t end = comma == std::string::npos ? text.size() : comma;
    std::string piece = text.substr(start, end - start);
    piece.erase(0, piece.find_first_not_of(" \t"));
    piece.erase(piece.find_last_not_of(" \t") + 1);
    if (piece.empty()) throw UsageError("empty entry in lambda list '" + text + "'");
    parts.push_back(piece);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  auto parse = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || !(v >= 0.0 && v <= 1.0)) throw UsageError("bad lambda value '" + s + "'");
    return v;
  };
  std::vector<double> out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i] != "...") {
      out.push_back(parse(parts[i]));
      continue;
    }
    // a,b,...,c expands the progression a, b, b + (b - a), ... up to c.
    if (out.size() < 2 || i + 1 >= parts.size()) throw UsageError("'...' needs two values before and one after");
    const double step = out[out.size() - 1] - out[out.size() - 2];
    const double last = parse(parts[++i]);
    if (step == 0.0 || (last - out.back()) / step < 0.0) throw UsageError("'...' progression never reaches its end");
    const double base = out.back();
    for (std::size_t k = 1;; ++k) {
      const double v = std::round((base + step * static_cast<double>(k)) * 1e9) / 1e9;
      if ((step > 0.0 && v > last + 1e-9) || (step < 0.0 && v < last - 1e-9)) break;
      out.push_back(v);
    }
    if (std::abs(out.back() - last) > 1e-9) throw UsageError("'...' progression does not land on its end value");
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (out[i] == out[j]) throw UsageError("duplicate lambda value " + label(out[i]));
    }
  }
  return out;
}

// ---- subcommands ----------------------------------------------------------

struct IngestArgs {
  fs::path input;
  IngestOptions options;
  std::size_t embed_dim = 64;
  double embed_scale = 1.0;
};

void cmd_ingest(Run& run, const Common& c, const IngestArgs& a) {
  const IngestResult r = ingest(run.input(a.input), a.options);
  for (std::size_t line : r.invalid_utf8_lines) logger().warn("line {}: invalid UTF-8, skipped", line + 1);
  write_sidecar(r.corpus, run / "corpus.txt");
  Json summary;
  summary["sentences"] = r.corpus.size();
  summary["dropped"] = r.dropped;
  summary["invalid_utf8_lines"] = r.invalid_utf8_lines;
  summary["tokens"] = r.corpus.total_tokens();
  summary["vocabulary"] = r.corpus.freq().size();
  if (a.embed_dim > 0) {
    EncoderInit init;
    init.dim = a.embed_dim;
    init.seed = c.seed;
    init.embed_scale = a.embed_scale;
    const EncoderParams params = init_encoder(r.corpus, init);
    write_embeddings(embed_corpus(params, r.corpus), run / "corpus.debc");
    save_encoder(params, run / "encoder");
    summary["embedding_dim"] = a.embed_dim;
  }
  write_text(run / "ingest.json", summary.dump(2) + "\n");
}

struct MineNegArgs {
  fs::path embeddings;
  fs::path corpus;
  NegativePoolConfig cfg;
  SurfaceFlags surface;
};

void cmd_mine_neg(Run& run, const Common& c, MineNegArgs a) {
  a.cfg.seed = c.seed;
  a.cfg.surface = a.surface.options();
  a.cfg.validate();
  const auto [corpus, emb] = load_aligned(run, a.embeddings, a.corpus);
  const NegativeMiningResult r = mine_all_negatives(corpus, emb, a.cfg, c.workers);
  write_negatives(r.mined, run / "negatives.jsonl");
  write_ids(run / "skipped.txt", r.skipped);
  run.note("mined_anchors", std::to_string(r.mined.size()));
  run.note("skipped_anchors", std::to_string(r.skipped.size()));
  logger().info("mined negatives for {} anchors, {} skipped", r.mined.size(), r.skipped.size());
}

struct GenPosArgs {
  fs::path corpus;
  PositiveGenConfig gen;
};

void cmd_gen_pos(Run& run, const Common& c, GenPosArgs a) {
  a.gen.seed = c.seed;
  a.gen.validate();
  const Corpus corpus = load_sidecar(run.input(a.corpus));
  const std::vector<std::string> vocab = top_frequency_words(corpus, a.gen.highfreq_vocab_size);
  std::vector<std::vector<std::string>> slots(corpus.size());
  parallel_chunks(corpus.size(), 64, c.workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Sentence& s = corpus[i];
      if (s.tokens.size() >= kMinAnchorTokens) slots[i] = generate_candidates(s, vocab, a.gen);
    }
  });
  std::string text;
  std::size_t total = 0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    for (const auto& cand : slots[i]) {
      text += candidate_record(i, cand) + "\n";
      ++total;
    }
  }
  write_text(run / "candidates.jsonl", text);
  run.note("candidates", std::to_string(total));
}

struct MinePosArgs {
  fs::path corpus;
  fs::path external;
  bool no_rule_based = false;
  EncoderSource encoder;
  PositiveMiningConfig cfg;
  SurfaceFlags surface;
};

void cmd_mine_pos(Run& run, const Common& c, MinePosArgs a) {
  if (a.no_rule_based && a.external.empty()) {
    throw UsageError("--no-rule-based leaves no candidates without --external-candidates");
  }
  a.cfg.gen.seed = c.seed;
  a.cfg.rule_based = !a.no_rule_based;
  a.cfg.surface = a.surface.options();
  a.cfg.gen.validate();
  const Corpus corpus = load_sidecar(run.input(a.corpus));
  const EncoderParams encoder = resolve_encoder(run, a.encoder, corpus, c.seed);
  std::optional<ExternalCandidates> ext;
  if (!a.external.empty()) {
    ext = load_external_candidates(run.input(a.external), corpus.size());
    if (ext->malformed > 0) logger().warn("{} malformed external candidate records skipped", ext->malformed);
    if (ext->out_of_range > 0) logger().warn("{} external candidates name unknown anchors", ext->out_of_range);
    run.note("external_malformed", std::to_string(ext->malformed));
    run.note("external_out_of_range", std::to_string(ext->out_of_range));
  }
  run.note("candidate_embeddings", "toy encoder applied to candidate tokens");
  const PositiveMiningResult r = mine_all_positives(corpus, encoder, a.cfg, ext ? &*ext : nullptr, c.workers);
  write_positives(r.mined, run / "positives.jsonl");
  write_ids(run / "skipped.txt", r.skipped);
  run.note("mined_anchors", std::to_string(r.mined.size()));
  run.note("skipped_anchors", std::to_string(r.skipped.size()));
}

struct TrainArgs {
  fs::path corpus;
  fs::path positives;
  fs::path negatives;
  fs::path dev;
  EncoderSource encoder;
  TrainConfig cfg;
};

DevMetric dev_metric(const StsDataset& ds) {
  return [&ds](const EncoderParams& p) { return eval_sts(ds, toy_source(p)); };
}

struct TrainOutcome {
  TrainResult result;
  std::size_t pairs = 0;
  std::size_t skipped = 0;
  double best_dev = 0.0;
};

TrainOutcome train_from(const Corpus& corpus, const std::vector<MinedPositives>& pos,
                        const std::vector<MinedNegatives>& neg, const EncoderParams& init, const TrainConfig& cfg,
                        const StsDataset* dev) {
  TrainOutcome o;
  const auto pairs = build_training_pairs(corpus, pos, neg, cfg.m, &o.skipped);
  o.pairs = pairs.size();
  if (pairs.size() <= cfg.m) throw DataError("too few training pairs for one batch (" + std::to_string(pairs.size()) + ")");
  o.result = train(init, pairs, cfg, dev ? dev_metric(*dev) : DevMetric{});
  if (o.result.steps == 0) throw DataError("no optimizer steps were taken");
  o.best_dev = -2.0;
  for (const auto& [step, score] : o.result.dev_scores) o.best_dev = std::max(o.best_dev, score);
  return o;
}

void cmd_train(Run& run, const Common& c, TrainArgs a) {
  a.cfg.seed = c.seed;
  a.cfg.validate();
  const Corpus corpus = load_sidecar(run.input(a.corpus));
  const auto pos = read_positives(run.input(a.positives));
  const auto neg = read_negatives(run.input(a.negatives));
  std::optional<StsDataset> dev;
  if (!a.dev.empty()) dev = load_sts(run.input(a.dev));
  const EncoderParams init = resolve_encoder(run, a.encoder, corpus, c.seed);
  const TrainOutcome o = train_from(corpus, pos, neg, init, a.cfg, dev ? &*dev : nullptr);

  save_encoder(o.result.best_params, run / "encoder");
  std::string curve = "step\tloss\n";
  for (std::size_t s = 0; s < o.result.loss_curve.size(); ++s) {
    curve += std::to_string(s + 1) + "\t" + num(o.result.loss_curve[s]) + "\n";
  }
  write_text(run / "loss_curve.txt", curve);
  Json summary;
  summary["pairs"] = o.pairs;
  summary["skipped_anchors"] = o.skipped;
  summary["steps"] = o.result.steps;
  summary["final_loss"] = o.result.loss_curve.back();
  if (dev) {
    std::string scores = "step\tspearman\n";
    for (const auto& [step, score] : o.result.dev_scores) scores += std::to_string(step) + "\t" + num(score) + "\n";
    write_text(run / "dev_scores.txt", scores);
    save_encoder(o.result.final_params, run / "final_encoder");
    summary["best_dev_spearman"] = o.best_dev;
  }
  write_text(run / "train.json", summary.dump(2) + "\n");
  logger().info("trained {} steps on {} pairs", o.result.steps, o.pairs);
}

struct BiasArgs {
  fs::path corpus;
  fs::path positives;
  fs::path negatives;
  EncoderSource encoder;
  std::string overlap = "multiplicity";
  bool no_baselines = false;
};

Json report_json(const BiasReport& r) {
  Json j;
  j["pos_pairs"] = r.pos_pairs;
  j["neg_pairs"] = r.neg_pairs;
  j["mean_overlap_pos"] = r.mean_overlap_pos;
  j["mean_overlap_neg"] = r.mean_overlap_neg;
  return j;
}

void cmd_analyze_bias(Run& run, const Common& c, const BiasArgs& a) {
  const OverlapMode mode = a.overlap == "types" ? OverlapMode::kTypes : OverlapMode::kMultiplicity;
  const Corpus corpus = load_sidecar(run.input(a.corpus));
  const auto pos = read_positives(run.input(a.positives));
  const auto neg = read_negatives(run.input(a.negatives));
  const EncoderParams encoder = resolve_encoder(run, a.encoder, corpus, c.seed);

  auto sentence = [&](SentenceId id) -> const Sentence& {
    if (id >= corpus.size()) throw DataError("record names sentence " + std::to_string(id) + " outside the corpus");
    return corpus[id];
  };
  std::vector<TextPair> pos_pairs;
  std::vector<TextPair> identical;
  for (const auto& p : pos) {
    const Tokens& anchor = sentence(p.anchor_id).tokens;
    for (const auto& text : p.positives) pos_pairs.push_back({anchor, tokenize(text)});
    identical.push_back({anchor, anchor});
  }
  std::vector<TextPair> neg_pairs;
  std::vector<TextPair> random_pairs;
  for (const auto& n : neg) {
    const Tokens& anchor = sentence(n.anchor_id).tokens;
    for (SentenceId id : n.negative_ids) neg_pairs.push_back({anchor, sentence(id).tokens});
    if (corpus.size() < 2) continue;
    // Uniform random partners stand in for in-batch negatives.
    KeyedRng rng(c.seed, n.anchor_id, Stream::kBaseline);
    const std::size_t k = std::min(n.negative_ids.size(), corpus.size() - 1);
    for (std::size_t j : uniform_subset(corpus.size() - 1, k, rng)) {
      random_pairs.push_back({anchor, corpus[j >= n.anchor_id ? j + 1 : j].tokens});
    }
  }

  const EmbeddingSource embed = toy_source(encoder);
  const BiasReport mined = bias_report(pos_pairs, neg_pairs, embed, mode);
  Json j;
  j["overlap_mode"] = a.overlap;
  j["mined"] = report_json(mined);
  write_histogram_csv(mined.sem_hist_pos, run / "sem_hist_pos.csv");
  write_histogram_csv(mined.sem_hist_neg, run / "sem_hist_neg.csv");
  if (!a.no_baselines) {
    const BiasReport base = bias_report(identical, random_pairs, embed, mode);
    j["baseline"] = report_json(base);
    j["baseline"]["positives"] = "anchor paired with itself";
    j["baseline"]["negatives"] = "uniform random partners";
    write_histogram_csv(base.sem_hist_pos, run / "baseline_sem_hist_pos.csv");
    write_histogram_csv(base.sem_hist_neg, run / "baseline_sem_hist_neg.csv");
  }
  write_text(run / "bias_report.json", j.dump(2) + "\n");
}

struct StsArgs {
  std::vector<fs::path> sts;
  fs::path embeddings;
  EncoderSource encoder;
  double threshold = 4.0;
};

std::vector<std::vector<double>> embedding_rows(const EmbeddingMatrix& emb) {
  std::vector<std::vector<double>> rows;
  rows.reserve(emb.count());
  for (std::size_t i = 0; i < emb.count(); ++i) {
    const auto r = emb.row(i);
    rows.emplace_back(r.begin(), r.end());
  }
  return rows;
}

// Embeds both sentences of every pair, rows 2i and 2i + 1.
std::vector<std::vector<double>> pair_vectors(Run& run, const StsArgs& a, const StsDataset& ds, const Common& c) {
  if (!a.embeddings.empty()) {
    auto rows = embedding_rows(read_embeddings(run.input(a.embeddings)));
    if (rows.size() != 2 * ds.pairs.size()) {
      throw DataError("embedding file holds " + std::to_string(rows.size()) + " rows, expected two per STS pair");
    }
    return rows;
  }
  if (a.encoder.path.empty()) throw UsageError("one of --encoder or --embeddings is required");
  const EncoderParams params = resolve_encoder(run, a.encoder, Corpus{}, c.seed);
  const EmbeddingSource embed = toy_source(params);
  std::vector<std::vector<double>> rows;
  for (const auto& p : ds.pairs) {
    const Tokens ta = tokenize(p.a);
    const Tokens tb = tokenize(p.b);
    if (ta.empty() || tb.empty()) throw DataError("STS pair with an empty sentence");
    rows.push_back(embed(ta));
    rows.push_back(embed(tb));
  }
  return rows;
}

void check_sts_source(const StsArgs& a) {
  if (!a.embeddings.empty() && !a.encoder.path.empty()) throw UsageError("--encoder and --embeddings conflict");
  if (a.embeddings.empty() && a.encoder.path.empty()) throw UsageError("one of --encoder or --embeddings is required");
  if (!a.embeddings.empty() && a.sts.size() != 1) throw UsageError("--embeddings pairs with exactly one --sts file");
}

void cmd_eval_sts(Run& run, const Common& c, const StsArgs& a) {
  check_sts_source(a);
  std::string table = "file\tpairs\tspearman\n";
  double total = 0.0;
  for (const auto& path : a.sts) {
    const StsDataset ds = load_sts(run.input(path));
    const double rho = eval_sts(ds, pair_vectors(run, a, ds, c));
    table += path.filename().string() + "\t" + std::to_string(ds.pairs.size()) + "\t" + num(rho) + "\n";
    total += rho;
    logger().info("{}: spearman {:.4f}", path.filename().string(), rho);
  }
  if (a.sts.size() > 1) table += "mean\t-\t" + num(total / static_cast<double>(a.sts.size())) + "\n";
  write_text(run / "sts.tsv", table);
}

void cmd_align_uniform(Run& run, const Common& c, const StsArgs& a) {
  check_sts_source(a);
  const StsDataset ds = load_sts(run.input(a.sts.front()));
  const auto rows = pair_vectors(run, a, ds, c);
  std::vector<std::pair<std::vector<double>, std::vector<double>>> positives;
  for (std::size_t i = 0; i < ds.pairs.size(); ++i) {
    if (ds.pairs[i].gold > a.threshold) positives.emplace_back(rows[2 * i], rows[2 * i + 1]);
  }
  if (positives.empty()) throw DataError("no STS pair scores above the alignment threshold");
  Json j;
  j["alignment"] = alignment(positives);
  j["uniformity"] = uniformity(rows);
  j["positive_pairs"] = positives.size();
  j["vectors"] = rows.size();
  j["threshold"] = a.threshold;
  write_text(run / "align_uniform.json", j.dump(2) + "\n");
}

struct SweepArgs {
  fs::path embeddings;
  fs::path corpus;
  fs::path dev;
  fs::path external;
  std::string lambda_n = "1,0.8,0.6,0.4,0.2,0";
  std::string lambda_p = "1,0.8,0.6,0.4,0.2,0";
  EncoderSource encoder;
  NegativePoolConfig neg;
  PositiveMiningConfig pos;
  TrainConfig train;
  SurfaceFlags surface;
};

void cmd_sweep(Run& run, const Common& c, SweepArgs a) {
  const std::vector<double> ln = parse_lambda_list(a.lambda_n);
  const std::vector<double> lp = parse_lambda_list(a.lambda_p);
  a.neg.seed = c.seed;
  a.neg.surface = a.surface.options();
  a.pos.gen.seed = c.seed;
  a.pos.surface = a.surface.options();
  a.pos.m = a.neg.m;
  a.train.m = a.neg.m;
  a.train.seed = c.seed;
  a.neg.validate();
  a.pos.gen.validate();
  a.train.validate();
  const auto [corpus, emb] = load_aligned(run, a.embeddings, a.corpus);
  const StsDataset dev = load_sts(run.input(a.dev));
  const EncoderParams init = resolve_encoder(run, a.encoder, corpus, c.seed);
  std::optional<ExternalCandidates> ext;
  if (!a.external.empty()) ext = load_external_candidates(run.input(a.external), corpus.size());

  std::vector<std::vector<MinedNegatives>> negs;
  for (double l : ln) {
    NegativePoolConfig cfg = a.neg;
    cfg.lambda_n = l;
    negs.push_back(mine_all_negatives(corpus, emb, cfg, c.workers).mined);
  }
  std::vector<std::vector<MinedPositives>> poss;
  for (double l : lp) {
    PositiveMiningConfig cfg = a.pos;
    cfg.lambda_p = l;
    poss.push_back(mine_all_positives(corpus, init, cfg, ext ? &*ext : nullptr, c.workers).mined);
  }

  // Cells are independent; each trains single-threaded into its own slot.
  std::vector<TrainOutcome> cells(ln.size() * lp.size());
  parallel_chunks(cells.size(), 1, c.workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      cells[k] = train_from(corpus, poss[k % lp.size()], negs[k / lp.size()], init, a.train, &dev);
    }
  });

  std::string grid = "lambda_n\\lambda_p";
  for (double p : lp) grid += "\t" + label(p);
  grid += "\n";
  std::string lines;
  for (std::size_t i = 0; i < ln.size(); ++i) {
    grid += label(ln[i]);
    for (std::size_t j = 0; j < lp.size(); ++j) {
      const TrainOutcome& o = cells[i * lp.size() + j];
      char cell[32];
      std::snprintf(cell, sizeof cell, "%.2f", 100.0 * o.best_dev);
      grid += std::string("\t") + cell;
      Json rec;
      rec["lambda_n"] = ln[i];
      rec["lambda_p"] = lp[j];
      rec["dev_spearman"] = o.best_dev;
      rec["pairs"] = o.pairs;
      rec["steps"] = o.result.steps;
      rec["final_loss"] = o.result.loss_curve.back();
      lines += rec.dump() + "\n";
    }
    grid += "\n";
  }
  write_text(run / "grid.tsv", grid);
  write_text(run / "cells.jsonl", lines);
  run.note("cells", std::to_string(cells.size()));
}

}  // namespace

int run(const std::vector<std::string>& argv) {
  configure_logging_from_env();
  CLI::App app{"Debiased contrastive data construction, training and analysis", "debcse"};
  app.set_config("--config", "", "TOML config file; command-line flags win");
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  app.set_version_flag("--version", tool_version());

  Common common;
  auto sub = [&](const std::string& name, const std::string& help) {
    CLI::App* s = app.add_subcommand(name, help);
    s->configurable();
    s->option_defaults()->always_capture_default();
    add_common(s, common);
    return s;
  };

  IngestArgs ingest_args;
  CLI::App* s_ingest = sub("ingest", "Tokenize and filter a corpus; optionally embed it with a seeded toy encoder");
  s_ingest->add_option("--input", ingest_args.input, "One sentence per line")->required();
  s_ingest->add_option("--min-tokens", ingest_args.options.min_tokens);
  s_ingest->add_option("--max-tokens", ingest_args.options.max_tokens);
  s_ingest->add_option("--embed-dim", ingest_args.embed_dim, "Toy embedding dimension (0 skips embedding)");
  s_ingest->add_option("--embed-scale", ingest_args.embed_scale, "Std of the initial token embeddings");

  MineNegArgs neg_args;
  CLI::App* s_neg = sub("mine-neg", "Mine IPW-weighted hard negatives");
  s_neg->add_option("--embeddings", neg_args.embeddings, "DEBC file (sidecar <base>.txt)")->required();
  s_neg->add_option("--corpus", neg_args.corpus, "Sidecar sentence file, default <embeddings>.txt");
  s_neg->add_option("--band-lo", neg_args.cfg.band_lo);
  s_neg->add_option("--band-hi", neg_args.cfg.band_hi);
  s_neg->add_option("--pool-cap", neg_args.cfg.pool_cap);
  s_neg->add_option("--lambda-n", neg_args.cfg.lambda_n);
  s_neg->add_option("--m", neg_args.cfg.m);
  add_surface(s_neg, neg_args.surface);

  GenPosArgs gen_args;
  CLI::App* s_gen = sub("gen-pos", "Write rule-based positive candidates in the external candidate format");
  s_gen->add_option("--corpus", gen_args.corpus, "Sidecar sentence file")->required();
  add_gen(s_gen, gen_args.gen);

  MinePosArgs pos_args;
  CLI::App* s_pos = sub("mine-pos", "Mine IPW-weighted positives");
  s_pos->add_option("--corpus", pos_args.corpus, "Sidecar sentence file")->required();
  s_pos->add_option("--external-candidates", pos_args.external, "NDJSON {anchor_id, candidate} records");
  s_pos->add_flag("--no-rule-based", pos_args.no_rule_based, "Use only external candidates");
  s_pos->add_option("--lambda-p", pos_args.cfg.lambda_p);
  s_pos->add_option("--m", pos_args.cfg.m);
  add_encoder(s_pos, pos_args.encoder);
  add_gen(s_pos, pos_args.cfg.gen);
  add_surface(s_pos, pos_args.surface);

  TrainArgs train_args;
  CLI::App* s_train = sub("train", "Train the toy encoder with the alternative-normalisation loss");
  s_train->add_option("--corpus", train_args.corpus, "Sidecar sentence file")->required();
  s_train->add_option("--positives", train_args.positives, "mine-pos output")->required();
  s_train->add_option("--negatives", train_args.negatives, "mine-neg output")->required();
  s_train->add_option("--dev", train_args.dev, "STS file evaluated every --eval-every steps");
  s_train->add_option("--tau", train_args.cfg.tau);
  s_train->add_option("--batch", train_args.cfg.batch_size);
  s_train->add_option("--m", train_args.cfg.m);
  s_train->add_option("--lr", train_args.cfg.lr);
  s_train->add_option("--epochs", train_args.cfg.epochs);
  s_train->add_option("--max-steps", train_args.cfg.max_steps, "Stop after this many steps (0 = no limit)");
  s_train->add_option("--eval-every", train_args.cfg.eval_every);
  s_train->add_flag("--include-positive", train_args.cfg.include_positive_in_denominator,
                    "Add the positive term to the denominator");
  s_train->add_flag("--stop-gradient", train_args.cfg.stop_gradient_on_z, "No gradient through z");
  add_encoder(s_train, train_args.encoder);

  BiasArgs bias_args;
  CLI::App* s_bias = sub("analyze-bias", "Surface and semantic bias report for mined pairs and baselines");
  s_bias->add_option("--corpus", bias_args.corpus, "Sidecar sentence file")->required();
  s_bias->add_option("--positives", bias_args.positives, "mine-pos output")->required();
  s_bias->add_option("--negatives", bias_args.negatives, "mine-neg output")->required();
  s_bias->add_option("--overlap", bias_args.overlap, "Word counting for overlap")
      ->check(CLI::IsMember({"types", "multiplicity"}));
  s_bias->add_flag("--no-baselines", bias_args.no_baselines, "Skip identical-positive and random-negative baselines");
  add_encoder(s_bias, bias_args.encoder);

  StsArgs sts_args;
  CLI::App* s_sts = sub("eval-sts", "Spearman correlation on STS files");
  s_sts->add_option("--sts", sts_args.sts, "Tab-separated gold, sentence_a, sentence_b")->required();
  s_sts->add_option("--embeddings", sts_args.embeddings, "DEBC rows 2i, 2i+1 for pair i");
  s_sts->add_option("--encoder", sts_args.encoder.path, "Encoder checkpoint base");

  StsArgs au_args;
  CLI::App* s_au = sub("align-uniform", "Alignment and uniformity on an STS file");
  s_au->add_option("--sts", au_args.sts, "Tab-separated gold, sentence_a, sentence_b")->required()->expected(1);
  s_au->add_option("--embeddings", au_args.embeddings, "DEBC rows 2i, 2i+1 for pair i");
  s_au->add_option("--encoder", au_args.encoder.path, "Encoder checkpoint base");
  s_au->add_option("--threshold", au_args.threshold, "Pairs with gold above this are positives");

  SweepArgs sw;
  CLI::App* s_sweep = sub("sweep", "Grid over lambda_n x lambda_p scored by dev Spearman");
  s_sweep->add_option("--embeddings", sw.embeddings, "DEBC file (sidecar <base>.txt)")->required();
  s_sweep->add_option("--corpus", sw.corpus, "Sidecar sentence file, default <embeddings>.txt");
  s_sweep->add_option("--dev", sw.dev, "STS file used to score each cell")->required();
  s_sweep->add_option("--lambda-n", sw.lambda_n, "Comma list; a,b,...,c expands a progression");
  s_sweep->add_option("--lambda-p", sw.lambda_p, "Comma list; a,b,...,c expands a progression");
  s_sweep->add_option("--external-candidates", sw.external, "NDJSON {anchor_id, candidate} records");
  s_sweep->add_option("--band-lo", sw.neg.band_lo);
  s_sweep->add_option("--band-hi", sw.neg.band_hi);
  s_sweep->add_option("--pool-cap", sw.neg.pool_cap);
  s_sweep->add_option("--m", sw.neg.m);
  s_sweep->add_option("--tau", sw.train.tau);
  s_sweep->add_option("--batch", sw.train.batch_size);
  s_sweep->add_option("--lr", sw.train.lr);
  s_sweep->add_option("--epochs", sw.train.epochs);
  s_sweep->add_option("--max-steps", sw.train.max_steps);
  s_sweep->add_option("--eval-every", sw.train.eval_every);
  add_encoder(s_sweep, sw.encoder);
  add_gen(s_sweep, sw.pos.gen);
  add_surface(s_sweep, sw.surface);

  std::vector<const char*> raw;
  for (const auto& a : argv) raw.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(raw.size()), raw.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  bool created = false;
  // A failed run leaves no half-written directory behind.
  auto fail = [&](const std::exception& e, int code) {
    std::cerr << "error: " << e.what() << "\n";
    std::error_code ec;
    if (created) fs::remove_all(common.out, ec);
    return code;
  };
  try {
    created = prepare_out(common.out);
    Run r(chosen->get_name(), chosen, common);
    if (const CLI::Option* cfg = app.get_config_ptr(); cfg != nullptr && cfg->count() > 0) {
      r.input(cfg->as<std::string>());
      r.note("config_file", cfg->as<std::string>());
    }
    const std::string name = chosen->get_name();
    if (name == "ingest") cmd_ingest(r, common, ingest_args);
    else if (name == "mine-neg") cmd_mine_neg(r, common, neg_args);
    else if (name == "gen-pos") cmd_gen_pos(r, common, gen_args);
    else if (name == "mine-pos") cmd_mine_pos(r, common, pos_args);
    else if (name == "train") cmd_train(r, common, train_args);
    else if (name == "analyze-bias") cmd_analyze_bias(r, common, bias_args);
    else if (name == "eval-sts") cmd_eval_sts(r, common, sts_args);
    else if (name == "align-uniform") cmd_align_uniform(r, common, au_args);
    else cmd_sweep(r, common, sw);
    r.finish();
    return kExitOk;
  } catch (const UsageError& e) {
    return fail(e, kExitUsage);
  } catch (const InvalidArgument& e) {
    return fail(e, kExitUsage);
  } catch (const std::exception& e) {
    return fail(e, kExitData);
  }
}

}  // namespace debcse::cli
