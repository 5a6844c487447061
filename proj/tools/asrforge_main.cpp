// asrforge: corpus curation and subword-CTC decoding pipeline CLI.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "asrforge/asrforge.hpp"

namespace fs = std::filesystem;
using namespace asrforge;

namespace {

// Layered key=value config file; command-line flags take precedence because
// CLI11 applies file values only to flags the user did not pass.
std::string g_config_path;

void echo_config(const CLI::App& sub) {
  std::ostringstream os;
  os << "run config: " << sub.get_name();
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_name().empty() || opt->count() == 0) continue;
    try {
      os << " " << opt->get_name() << "=" << opt->as<std::string>();
    } catch (const std::exception&) {
      os << " " << opt->get_name();
    }
  }
  log(LogLevel::info, os.str());
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

LangProfile profile_for(const std::string& lang, const std::string& fold_table) {
  const Lang l = parse_lang(lang);
  return fold_table.empty() ? LangProfile::for_lang(l)
                            : LangProfile::with_fold_table_file(l, fold_table);
}

std::map<Split, double> parse_split_targets(const std::string& spec) {
  std::map<Split, double> targets;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::MalformedFile, "expected split=value, got: " + part);
    targets[parse_split(part.substr(0, eq))] = std::stod(part.substr(eq + 1));
  }
  return targets;
}

TargetSequence parse_target_ids(const std::string& spec) {
  std::vector<int> ids;
  std::stringstream ss(spec);
  int v;
  while (ss >> v) ids.push_back(v);
  return TargetSequence(ids);
}

int run(int argc, char** argv) {
  CLI::App app{"asrforge: Perso-Arabic speech corpus curation and subword CTC toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; flags override file values");

  // ---- ingest ----------------------------------------------------------
  auto* ingest_cmd = app.add_subcommand("ingest", "build a manifest from audio files");
  std::string in_path, lang = "persian", dataset = "default", split_tag = "pretrain";
  std::string manifest_path, fold_table;
  int jobs = 0;
  ingest_cmd->add_option("--in", in_path, "audio directory or listing file")->required();
  ingest_cmd->add_option("--lang", lang, "urdu|persian|arabic");
  ingest_cmd->add_option("--dataset", dataset, "dataset tag");
  ingest_cmd->add_option("--split", split_tag, "pretrain|train|valid|test");
  ingest_cmd->add_option("--manifest", manifest_path, "output manifest (JSONL)")->required();
  ingest_cmd->add_option("--fold-table", fold_table, "override fold-table data file");
  ingest_cmd->add_option("--jobs", jobs, "parallel file workers (0 = cores)");

  // ---- vad -------------------------------------------------------------
  auto* vad_cmd = app.add_subcommand("vad", "compute frame speech probabilities");
  std::string vad_in, vad_out;
  int frame_ms = 30, hop_ms = 10;
  vad_cmd->add_option("--in", vad_in, "input WAV")->required();
  vad_cmd->add_option("--out", vad_out, "output probability file")->required();
  vad_cmd->add_option("--frame-ms", frame_ms, "frame length (ms)");
  vad_cmd->add_option("--hop-ms", hop_ms, "hop length (ms)");

  // ---- chunk -----------------------------------------------------------
  auto* chunk_cmd = app.add_subcommand("chunk", "cut speech chunks from probabilities");
  std::string probs_path, chunk_audio, chunk_outdir, chunk_manifest, source_id;
  std::string chunk_lang = "persian", chunk_dataset = "default";
  ChunkingConfig chunk_cfg;
  chunk_cmd->add_option("--probs", probs_path, "frame-probability file")->required();
  chunk_cmd->add_option("--audio", chunk_audio, "source WAV to slice into chunk files");
  chunk_cmd->add_option("--outdir", chunk_outdir, "directory for chunk WAVs");
  chunk_cmd->add_option("--manifest", chunk_manifest, "output chunk manifest (JSONL)");
  chunk_cmd->add_option("--source-id", source_id, "utterance id for provenance");
  chunk_cmd->add_option("--lang", chunk_lang, "urdu|persian|arabic");
  chunk_cmd->add_option("--dataset", chunk_dataset, "dataset tag");
  chunk_cmd->add_option("--min", chunk_cfg.min_chunk_s, "minimum chunk seconds");
  chunk_cmd->add_option("--max", chunk_cfg.max_chunk_s, "maximum chunk seconds");
  chunk_cmd->add_option("--thresh", chunk_cfg.speech_prob_threshold, "mean speech probability floor");
  chunk_cmd->add_option("--merge-gap", chunk_cfg.merge_gap_s, "merge segments separated by less (s)");
  chunk_cmd->add_option("--onset", chunk_cfg.onset_prob, "segment onset probability");
  chunk_cmd->add_option("--offset", chunk_cfg.offset_prob, "segment offset probability");

  // ---- stats -----------------------------------------------------------
  auto* stats_cmd = app.add_subcommand("stats", "corpus statistics from a manifest");
  std::string stats_manifest, stats_csv;
  stats_cmd->add_option("--manifest", stats_manifest, "manifest (JSONL)")->required();
  stats_cmd->add_option("--csv", stats_csv, "also write per-bucket CSV here");

  // ---- normalize -------------------------------------------------------
  auto* norm_cmd = app.add_subcommand("normalize", "normalize transcript text");
  std::string norm_lang = "persian", norm_in, norm_out, norm_fold;
  norm_cmd->add_option("--lang", norm_lang, "urdu|persian|arabic")->required();
  norm_cmd->add_option("--in", norm_in, "input text file (default stdin)");
  norm_cmd->add_option("--out", norm_out, "output text file (default stdout)");
  norm_cmd->add_option("--fold-table", norm_fold, "override fold-table data file");

  // ---- bpe-train -------------------------------------------------------
  auto* bpe_cmd = app.add_subcommand("bpe-train", "train a BPE subword model");
  std::string bpe_corpus, bpe_lang = "persian", bpe_out, bpe_symtab, bpe_fold;
  int vocab_size = 512;
  bool bpe_raw = false;
  bpe_cmd->add_option("--corpus", bpe_corpus, "training sentences, one per line")->required();
  bpe_cmd->add_option("--vocab", vocab_size, "subword vocabulary size");
  bpe_cmd->add_option("--lang", bpe_lang, "urdu|persian|arabic");
  bpe_cmd->add_option("--out", bpe_out, "output model file")->required();
  bpe_cmd->add_option("--symtab", bpe_symtab, "also write the CTC symbol table here");
  bpe_cmd->add_option("--fold-table", bpe_fold, "override fold-table data file");
  bpe_cmd->add_flag("--raw", bpe_raw, "corpus is already normalized; skip normalization");

  // ---- encode ----------------------------------------------------------
  auto* encode_cmd = app.add_subcommand("encode", "encode sentences to piece indices");
  std::string enc_model, enc_in, enc_out, enc_format = "ids";
  bool enc_raw = false;
  encode_cmd->add_option("--model", enc_model, "BPE model file")->required();
  encode_cmd->add_option("--in", enc_in, "input sentences (default stdin)");
  encode_cmd->add_option("--out", enc_out, "output file (default stdout)");
  encode_cmd->add_option("--format", enc_format, "ids|pieces");
  encode_cmd->add_flag("--raw", enc_raw, "input is already normalized");

  // ---- ctc-loss --------------------------------------------------------
  auto* loss_cmd = app.add_subcommand("ctc-loss", "CTC loss of a target under logits");
  std::string loss_logits, loss_symtab, loss_model, loss_target_text, loss_target_ids;
  std::string loss_grad_out;
  loss_cmd->add_option("--logits", loss_logits, "logit file (CTCL)")->required();
  loss_cmd->add_option("--symtab", loss_symtab, "symbol table file")->required();
  loss_cmd->add_option("--target-ids", loss_target_ids, "target as space-separated indices");
  loss_cmd->add_option("--target-text", loss_target_text, "target as normalized text");
  loss_cmd->add_option("--model", loss_model, "BPE model (needed with --target-text)");
  loss_cmd->add_option("--grad-out", loss_grad_out, "write gradient as a CTCL file");

  // ---- decode ----------------------------------------------------------
  auto* decode_cmd = app.add_subcommand("decode", "decode logits to pieces and text");
  std::string dec_logits, dec_symtab, dec_model, dec_out;
  int beam_width = 32;
  bool dec_greedy = false;
  decode_cmd->add_option("--logits", dec_logits, "logit file (CTCL)")->required();
  decode_cmd->add_option("--symtab", dec_symtab, "symbol table file")->required();
  decode_cmd->add_option("--model", dec_model, "BPE model for word regrouping");
  decode_cmd->add_option("--beam", beam_width, "beam width");
  decode_cmd->add_flag("--greedy", dec_greedy, "greedy decoding instead of beam search");
  decode_cmd->add_option("--out", dec_out, "output file (default stdout)");

  // ---- split -----------------------------------------------------------
  auto* split_cmd = app.add_subcommand("split", "stratified train/valid/test split");
  std::string split_manifest_path, split_out, ratios_spec, hours_spec;
  std::uint64_t seed = 0;
  split_cmd->add_option("--manifest", split_manifest_path, "input manifest")->required();
  split_cmd->add_option("--out", split_out, "output manifest")->required();
  split_cmd->add_option("--ratios", ratios_spec, "e.g. train=0.85,valid=0.15");
  split_cmd->add_option("--hours", hours_spec, "e.g. train=4.23,valid=0.73");
  split_cmd->add_option("--seed", seed, "random seed");

  // ---- score -----------------------------------------------------------
  auto* score_cmd = app.add_subcommand("score", "WER/CER evaluation report");
  std::string refs_path, hyps_path, score_mode = "subword", score_csv, score_fold;
  int score_jobs = 0;
  score_cmd->add_option("--refs", refs_path, "reference manifest (JSONL)")->required();
  score_cmd->add_option("--hyps", hyps_path, "hypotheses file (id<TAB>text)")->required();
  score_cmd->add_option("--mode", score_mode, "tokenization mode tag: char|subword");
  score_cmd->add_option("--csv", score_csv, "also write machine-readable rows here");
  score_cmd->add_option("--fold-table", score_fold, "override fold-table data file");
  score_cmd->add_option("--jobs", score_jobs, "parallel scoring workers (0 = cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Usage errors exit 2; --help and friends exit 0.
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  CLI::App* sub = app.get_subcommands().front();
  echo_config(*sub);

  if (sub == ingest_cmd) {
    IngestOptions opts;
    opts.lang = parse_lang(lang);
    opts.dataset = dataset;
    opts.split = parse_split(split_tag);
    opts.jobs = jobs;
    const auto profile = profile_for(lang, fold_table);
    auto result = ingest(collect_audio_paths(in_path), opts, profile);
    save_manifest(result.manifest, manifest_path);
    log(LogLevel::info, "ingested " + std::to_string(result.manifest.records.size()) +
                            " records, dropped " + std::to_string(result.duplicates_dropped) +
                            " duplicates");
    const auto s = stats(result.manifest);
    std::cout << render_overview(s);
    return 0;
  }

  if (sub == vad_cmd) {
    FrameConfig cfg;
    cfg.frame_ms = frame_ms;
    cfg.hop_ms = hop_ms;
    const AudioBuffer buf = resample_to_16k(read_wav(vad_in));
    export_speech_probs(compute_speech_probs(buf, cfg), vad_out);
    return 0;
  }

  if (sub == chunk_cmd) {
    const auto fp = import_speech_probs(probs_path);
    const auto segments = detect_segments(fp, chunk_cfg);
    std::string sid = source_id.empty() ? detail::path_stem(probs_path) : source_id;
    const auto chunks = chunk_segments(segments, fp, chunk_cfg, sid);

    std::optional<AudioBuffer> audio;
    if (!chunk_audio.empty()) {
      if (chunk_outdir.empty())
        throw Error(ErrorCode::IoFailure, "--audio requires --outdir");
      audio = resample_to_16k(read_wav(chunk_audio));
    }

    Manifest manifest;
    for (const auto& chunk : chunks) {
      UtteranceRecord r;
      r.id = chunk_filename(chunk);
      r.id = r.id.substr(0, r.id.size() - 4);  // drop .wav
      r.duration_s = chunk.duration_s();
      r.lang = parse_lang(chunk_lang);
      r.dataset = chunk_dataset;
      r.split = Split::pretrain;
      r.audio_path = chunk_outdir.empty() ? chunk_filename(chunk)
                                          : (fs::path(chunk_outdir) / chunk_filename(chunk)).string();
      if (audio) {
        fs::create_directories(chunk_outdir);
        write_wav(extract_chunk(*audio, chunk), r.audio_path);
      }
      manifest.records.push_back(std::move(r));
      char line[160];
      std::snprintf(line, sizeof(line), "%s\t%.3f\t%.3f\t%.4f", chunk_filename(chunk).c_str(),
                    chunk.start_s, chunk.end_s, chunk.mean_speech_prob);
      std::cout << line << "\n";
    }
    if (!chunk_manifest.empty()) {
      manifest.sort_by_id();
      save_manifest(manifest, chunk_manifest);
    }
    log(LogLevel::info, "emitted " + std::to_string(chunks.size()) + " chunks from " +
                            std::to_string(segments.size()) + " segments");
    return 0;
  }

  if (sub == stats_cmd) {
    const auto s = stats(load_manifest(stats_manifest));
    std::cout << render_overview(s);
    if (!stats_csv.empty()) {
      std::ofstream out(stats_csv, std::ios::trunc);
      out << render_stats_csv(s);
    }
    return 0;
  }

  if (sub == norm_cmd) {
    const auto profile = profile_for(norm_lang, norm_fold);
    std::istream* in = &std::cin;
    std::ifstream fin;
    if (!norm_in.empty()) {
      fin.open(norm_in);
      if (!fin) throw Error(ErrorCode::IoFailure, "cannot open " + norm_in);
      in = &fin;
    }
    std::ostream* out = &std::cout;
    std::ofstream fout;
    if (!norm_out.empty()) {
      fout.open(norm_out, std::ios::trunc);
      if (!fout) throw Error(ErrorCode::IoFailure, "cannot open for write: " + norm_out);
      out = &fout;
    }
    std::string line;
    while (std::getline(*in, line)) *out << normalize(line, profile) << "\n";
    return 0;
  }

  if (sub == bpe_cmd) {
    const auto profile = profile_for(bpe_lang, bpe_fold);
    std::vector<std::string> corpus = read_lines(bpe_corpus);
    if (!bpe_raw)
      for (auto& line : corpus) line = normalize(line, profile);
    const auto model = BpeModel::train(corpus, vocab_size, profile.lang);
    model.save(bpe_out);
    if (!bpe_symtab.empty()) model.symbol_table().save(bpe_symtab);
    log(LogLevel::info, "trained " + std::to_string(model.pieces().size()) + " pieces, " +
                            std::to_string(model.merges().size()) + " merges");
    std::cout << "pieces " << model.pieces().size() << "\n";
    return 0;
  }

  if (sub == encode_cmd) {
    const auto model = BpeModel::load(enc_model);
    const auto profile = LangProfile::for_lang(model.lang());
    std::istream* in = &std::cin;
    std::ifstream fin;
    if (!enc_in.empty()) {
      fin.open(enc_in);
      if (!fin) throw Error(ErrorCode::IoFailure, "cannot open " + enc_in);
      in = &fin;
    }
    std::ostream* out = &std::cout;
    std::ofstream fout;
    if (!enc_out.empty()) {
      fout.open(enc_out, std::ios::trunc);
      if (!fout) throw Error(ErrorCode::IoFailure, "cannot open for write: " + enc_out);
      out = &fout;
    }
    std::string line;
    while (std::getline(*in, line)) {
      const std::string text = enc_raw ? line : normalize(line, profile);
      const auto ids = model.encode_sentence(text);
      bool first = true;
      for (int id : ids) {
        if (!first) *out << ' ';
        first = false;
        if (enc_format == "pieces")
          *out << model.symbol_table().symbol(id);
        else
          *out << id;
      }
      *out << "\n";
    }
    return 0;
  }

  if (sub == loss_cmd) {
    const auto table = CtcSymbolTable::load(loss_symtab);
    const auto logits = read_logits(loss_logits);
    TargetSequence target;
    if (!loss_target_ids.empty()) {
      target = parse_target_ids(loss_target_ids);
    } else if (!loss_target_text.empty()) {
      if (loss_model.empty())
        throw Error(ErrorCode::MalformedFile, "--target-text requires --model");
      const auto model = BpeModel::load(loss_model);
      target = TargetSequence(model.encode_sentence(loss_target_text));
    } else {
      throw Error(ErrorCode::MalformedFile, "need --target-ids or --target-text");
    }
    const auto result = ctc_loss(log_softmax(logits), target);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9f", result.loss);
    std::cout << "loss " << buf << (result.feasible ? "" : " infeasible") << "\n";
    if (!loss_grad_out.empty()) write_logits(result.grad, loss_grad_out);
    return 0;
  }

  if (sub == decode_cmd) {
    const auto table = CtcSymbolTable::load(dec_symtab);
    const auto logp = log_softmax(read_logits(dec_logits));
    std::vector<int> labels;
    double score_logp = 0.0;
    if (dec_greedy) {
      labels = greedy_decode(logp, table);
    } else {
      BeamConfig cfg;
      cfg.beam_width = beam_width;
      const auto ranked = beam_decode(logp, table, cfg);
      if (!ranked.empty()) {
        labels = ranked.front().labels;
        score_logp = ranked.front().log_prob;
      }
    }
    std::ostream* out = &std::cout;
    std::ofstream fout;
    if (!dec_out.empty()) {
      fout.open(dec_out, std::ios::trunc);
      if (!fout) throw Error(ErrorCode::IoFailure, "cannot open for write: " + dec_out);
      out = &fout;
    }
    *out << "ids";
    for (int id : labels) *out << ' ' << id;
    *out << "\n";
    if (!dec_greedy) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.9f", score_logp);
      *out << "logprob " << buf << "\n";
    }
    if (!dec_model.empty()) {
      const auto model = BpeModel::load(dec_model);
      *out << "text " << model.decode_pieces(labels) << "\n";
    }
    return 0;
  }

  if (sub == split_cmd) {
    SplitSpec spec;
    if (!ratios_spec.empty() && !hours_spec.empty())
      throw Error(ErrorCode::MalformedFile, "give --ratios or --hours, not both");
    if (!ratios_spec.empty()) {
      spec.targets = parse_split_targets(ratios_spec);
      spec.targets_are_hours = false;
    } else if (!hours_spec.empty()) {
      spec.targets = parse_split_targets(hours_spec);
      spec.targets_are_hours = true;
    } else {
      throw Error(ErrorCode::MalformedFile, "need --ratios or --hours");
    }
    const auto manifest = split_manifest(load_manifest(split_manifest_path), spec, seed);
    save_manifest(manifest, split_out);
    std::cout << render_overview(stats(manifest));
    return 0;
  }

  if (sub == score_cmd) {
    const auto manifest = load_manifest(refs_path);
    if (manifest.records.empty())
      throw Error(ErrorCode::InsufficientData, "empty reference manifest");
    Lang lang = manifest.records.front().lang;
    for (const auto& r : manifest.records)
      if (r.transcript) lang = r.lang;
    LangProfile profile = score_fold.empty()
                              ? LangProfile::for_lang(lang)
                              : LangProfile::with_fold_table_file(lang, score_fold);
    const auto report =
        score(manifest, load_hypotheses(hyps_path), profile, score_mode, score_jobs);
    std::cout << render_report(report);
    if (!score_csv.empty()) {
      std::ofstream out(score_csv, std::ios::trunc);
      out << render_report_csv(report);
    }
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
