#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "gbias/gbias.hpp"

namespace gbias::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string hex(const unsigned char* data, unsigned len) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    out += digits[data[i] >> 4];
    out += digits[data[i] & 0xF];
  }
  return out;
}

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw Error("SHA-256 initialisation failed");
    }
  }
  void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx_.get(), data, n); }
  std::string finish() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned len = 0;
    EVP_DigestFinal_ex(ctx_.get(), md, &len);
    return hex(md, len);
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

std::string sha256_of(const std::string& text) {
  Sha256 h;
  h.update(text.data(), text.size());
  return h.finish();
}

struct RunConfig {
  std::string subcommand;
  std::string embeddings;
  std::string embeddings_en;
  std::string lexicon;
  std::string lexicon_en;
  std::string dict;
  std::string seed_dict;
  std::string dataset;
  std::string method;
  std::string out;
  std::size_t n_perm = 10000;
  std::uint64_t seed = 0;
  std::optional<std::size_t> max_words;
  std::optional<double> ridge;
  bool csls = false;
  bool is_signed = false;
  bool reverse = false;
  bool restrict_pairs = false;
  bool renormalize = false;

  std::vector<std::pair<const char*, const std::string*>> inputs() const {
    return {{"dataset", &dataset},   {"dict", &dict},
            {"embeddings", &embeddings}, {"embeddings-en", &embeddings_en},
            {"lexicon", &lexicon},   {"lexicon-en", &lexicon_en},
            {"seed-dict", &seed_dict}};
  }
};

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw ValidationError(std::string("--") + flag + " is required");
}

void check_inputs_exist(const RunConfig& c) {
  for (const auto& [flag, path] : c.inputs()) {
    if (!path->empty() && !fs::is_regular_file(*path)) {
      throw IoError("--" + std::string(flag) + ": no such file '" + *path + "'");
    }
  }
}

json meta(const RunConfig& c) {
  json inputs = json::object();
  for (const auto& [flag, path] : c.inputs()) {
    if (path->empty()) continue;
    inputs[flag] = {{"file", fs::path(*path).filename().string()}, {"sha256", file_sha256(*path)}};
  }
  json config{{"subcommand", c.subcommand},
              {"seed", c.seed},
              {"n_perm", c.n_perm},
              {"max_words", c.max_words ? json(*c.max_words) : json(nullptr)},
              {"ridge", c.ridge ? json(*c.ridge) : json(nullptr)},
              {"method", c.method.empty() ? json(nullptr) : json(c.method)},
              {"csls", c.csls},
              {"signed", c.is_signed},
              {"reverse", c.reverse},
              {"restrict", c.restrict_pairs},
              {"renormalize", c.renormalize}};
  return {{"tool_version", kToolVersion},
          {"seed", c.seed},
          {"n_perm", c.n_perm},
          {"max_words", config["max_words"]},
          {"inputs", inputs},
          {"config", config},
          {"config_digest", sha256_of(config.dump() + inputs.dump())}};
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << text;
  f.flush();
  if (!f) throw IoError("write failure on " + path);
}

void write_json(const std::string& path, const json& j, std::ostream& out) {
  write_text(path, j.dump(2) + "\n", out);
}

std::string sibling(const std::string& path, const std::string& suffix) {
  fs::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

EmbeddingSpace load_space(const std::string& path, const RunConfig& c, const char* tag) {
  return unit_normalize(load_text_embeddings(path, c.max_words, tag));
}

struct LoadedLexicon {
  GenderLexicon lexicon;
  std::vector<std::string> dropped;
};

LoadedLexicon load_covered(const std::string& path, const EmbeddingSpace& space) {
  auto cov = coverage_filter(load_lexicon(path), space);
  if (!cov.dropped.empty()) {
    warn(path + ": " + std::to_string(cov.dropped.size()) + " lexicon entries not in the vocabulary");
  }
  return {std::move(cov.lexicon), std::move(cov.dropped)};
}

DirectionOptions direction_options(const RunConfig& c) {
  DirectionOptions o;
  o.ridge = c.ridge;
  o.seed = c.seed;
  return o;
}

GenderDirections directions_for(const RunConfig& c, const EmbeddingSpace& space,
                                 const GenderLexicon& lexicon, DirectionOptions options) {
  if (c.embeddings_en.empty()) return build_directions(space, lexicon, options);
  require(c.lexicon_en, "lexicon-en");
  auto en = load_space(c.embeddings_en, c, "en");
  auto en_lex = load_covered(c.lexicon_en, en).lexicon;
  return bilingual_directions(BilingualSpace(space, std::move(en)), lexicon, en_lex.definitional_pairs,
                              options);
}

int cmd_directions(const RunConfig& c, std::ostream& out) {
  require(c.embeddings, "embeddings");
  require(c.lexicon, "lexicon");
  auto space = load_space(c.embeddings, c, "src");
  auto lex = load_covered(c.lexicon, space);
  auto options = direction_options(c);
  const auto fold_floor = static_cast<std::size_t>(options.folds);
  options.cross_validate = lex.lexicon.grammatical_masculine.size() >= fold_floor &&
                           lex.lexicon.grammatical_feminine.size() >= fold_floor;
  if (!options.cross_validate) warn("too few grammatical nouns for cross-validation");
  const auto dirs = directions_for(c, space, lex.lexicon, options);
  write_json(c.out, {{"meta", meta(c)}, {"directions", directions_to_json(dirs)}, {"dropped", lex.dropped}},
             out);
  return 0;
}

int cmd_audit(const RunConfig& c, std::ostream& out) {
  require(c.embeddings, "embeddings");
  require(c.lexicon, "lexicon");
  auto space = load_space(c.embeddings, c, "src");
  auto lex = load_covered(c.lexicon, space);
  const auto report =
      bias_report(occupation_query(lex.lexicon), space, lex.lexicon.inanimate_nouns, c.n_perm, c.seed);
  write_json(c.out, {{"meta", meta(c)}, {"audit", bias_report_to_json(report, c.is_signed)}, {"dropped", lex.dropped}},
             out);
  return 0;
}

int cmd_mitigate(const RunConfig& c, std::ostream& out) {
  require(c.method, "method");
  require(c.embeddings, "embeddings");
  require(c.lexicon, "lexicon");
  require(c.out, "out");
  MitigationPlan plan;
  plan.method = parse_method(c.method);
  plan.direction_options = direction_options(c);

  auto source = load_space(c.embeddings, c, "src");
  auto lex = load_covered(c.lexicon, source);
  plan.lexicon = std::move(lex.lexicon);
  std::optional<EmbeddingSpace> english;
  if (is_bilingual(plan.method)) {
    require(c.embeddings_en, "embeddings-en");
    english = load_space(c.embeddings_en, c, "en");
    if (!c.lexicon_en.empty()) plan.en_debias = hard_debias_config(load_covered(c.lexicon_en, *english).lexicon);
    if (needs_alignment(plan.method)) require(c.lexicon_en, "lexicon-en");
  }
  if (!c.seed_dict.empty()) plan.seed_dictionary = load_dictionary(c.seed_dict);

  auto outcome = run_mitigation(plan, source, english ? &*english : nullptr);
  if (c.renormalize) finalize_unit_norm(outcome);

  fs::create_directories(c.out);
  const fs::path dir(c.out);
  save_text_embeddings(outcome.source, dir / (c.method + ".vec"));
  if (outcome.target) save_text_embeddings(*outcome.target, dir / (c.method + ".en.vec"));
  write_json((dir / "mitigate.json").string(),
             {{"meta", meta(c)}, {"mitigation", outcome_to_json(outcome)}, {"dropped", lex.dropped}}, out);
  return 0;
}

int cmd_eval_similarity(const RunConfig& c, std::ostream& out) {
  require(c.embeddings, "embeddings");
  require(c.dataset, "dataset");
  auto space = load_space(c.embeddings, c, "src");
  const auto report = word_similarity_eval(space, load_similarity_dataset(c.dataset));
  write_json(c.out, {{"meta", meta(c)}, {"report", eval_report_to_json(report)}}, out);
  return 0;
}

int cmd_eval_translation(const RunConfig& c, std::ostream& out) {
  require(c.embeddings, "embeddings");
  require(c.embeddings_en, "embeddings-en");
  require(c.dict, "dict");
  BilingualSpace bi(load_space(c.embeddings, c, "src"), load_space(c.embeddings_en, c, "en"));
  if (c.reverse) bi = reversed(bi);
  const auto result = word_translation_eval(bi, load_dictionary(c.dict), {1, 5}, c.csls);
  write_json(c.out, {{"meta", meta(c)}, {"report", eval_report_to_json(result.report)}}, out);
  if (!c.out.empty()) {
    std::ostringstream csv;
    write_translation_details(csv, result.details);
    write_text(sibling(c.out, ".details.csv"), csv.str(), out);
  }
  return 0;
}

int cmd_eval_pairs(const RunConfig& c, std::ostream& out) {
  require(c.embeddings, "embeddings");
  require(c.embeddings_en, "embeddings-en");
  require(c.lexicon, "lexicon");
  BilingualSpace bi(load_space(c.embeddings, c, "src"), load_space(c.embeddings_en, c, "en"));
  auto lex = load_covered(c.lexicon, bi.source);
  const auto queries = build_analogy_queries(lex.lexicon.occupation_pairs, lex.lexicon.adjective_pairs);
  PairTranslationOptions options;
  options.restrict_to_occupations = c.restrict_pairs;
  const auto result = pair_translation_eval(bi, queries.queries, lex.lexicon.occupation_pairs, options);
  auto report = eval_report_to_json(result.report);
  report["queries"] = queries.arithmetic;
  write_json(c.out, {{"meta", meta(c)}, {"report", report}, {"dropped", lex.dropped}}, out);
  return 0;
}

int cmd_export_projections(const RunConfig& c, std::ostream& out) {
  require(c.embeddings, "embeddings");
  require(c.lexicon, "lexicon");
  auto space = load_space(c.embeddings, c, "src");
  auto lex = load_covered(c.lexicon, space);
  const auto dirs = directions_for(c, space, lex.lexicon, direction_options(c));
  const auto table = export_projections(space, projection_words(lex.lexicon), dirs);
  for (const auto& w : table.missing) warn("projection word '" + w + "' not in the vocabulary");
  std::ostringstream csv;
  write_projections_csv(csv, table);
  write_text(c.out, csv.str(), out);
  if (!c.out.empty()) {
    write_json(sibling(c.out, ".meta.json"),
               {{"meta", meta(c)}, {"rows", table.rows.size()}, {"missing", table.missing}}, out);
  }
  return 0;
}

int cmd_correlate(const RunConfig& c, std::ostream& out) {
  require(c.embeddings, "embeddings");
  require(c.embeddings_en, "embeddings-en");
  require(c.lexicon, "lexicon");
  require(c.lexicon_en, "lexicon-en");
  auto source = load_space(c.embeddings, c, "src");
  auto english = load_space(c.embeddings_en, c, "en");
  auto lex = load_covered(c.lexicon, source).lexicon;
  auto en_lex = load_covered(c.lexicon_en, english).lexicon;
  const AssociationScorer src_score(source, lex.attributes_male, lex.attributes_female);
  const AssociationScorer en_score(english, en_lex.attributes_male, en_lex.attributes_female);

  std::map<std::string, double> src_bias;
  std::map<std::string, double> en_bias;
  json rows = json::array();
  for (const auto& p : lex.occupation_pairs) {
    if (!p.english || !english.contains(*p.english)) continue;
    const double s = std::abs(src_score(p.masculine)) - std::abs(src_score(p.feminine));
    const double e = en_score(*p.english);
    src_bias[*p.english] = s;
    en_bias[*p.english] = e;
    rows.push_back({{"english", *p.english}, {"pair", {p.masculine, p.feminine}}, {"source_signed", s}, {"english_weat", e}});
  }
  const auto r = bias_correlation(src_bias, en_bias);
  write_json(c.out,
             {{"meta", meta(c)}, {"correlation", {{"spearman_rho", r.rho}, {"p_value", r.p_value}, {"n", r.n}}}, {"per_word", rows}},
             out);
  return 0;
}

}  // namespace

std::string file_sha256(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  Sha256 h;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    if (in.gcount() > 0) h.update(buf, static_cast<std::size_t>(in.gcount()));
  }
  if (in.bad()) throw IoError("read failure on " + path);
  return h.finish();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Gender-bias audit and mitigation for bilingual word embeddings", "gbias"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", kToolVersion);

  auto add_input = [&](CLI::App* sub, const char* name, std::string& target, const char* help) {
    sub->add_option(std::string("--") + name, target, help);
  };
  auto add_max_words = [&](CLI::App* sub) {
    sub->add_option_function<std::size_t>("--max-words", [&](const std::size_t& n) { c.max_words = n; },
                                          "Load only the first N words of each embedding file");
  };
  auto add_ridge = [&](CLI::App* sub) {
    sub->add_option_function<double>("--ridge", [&](const double& r) { c.ridge = r; },
                                     "LDA ridge added to the pooled covariance diagonal");
  };
  auto add_out = [&](CLI::App* sub, const char* help) { sub->add_option("--out", c.out, help); };
  auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", c.seed, "Random seed"); };

  auto* directions = app.add_subcommand("directions", "Semantic and grammatical gender directions");
  add_input(directions, "embeddings", c.embeddings, "Gendered-language embeddings (.vec)");
  add_input(directions, "lexicon", c.lexicon, "Gender lexicon (JSON)");
  add_input(directions, "embeddings-en", c.embeddings_en, "Aligned English embeddings for bilingual directions");
  add_input(directions, "lexicon-en", c.lexicon_en, "English lexicon");
  add_ridge(directions);
  add_seed(directions);
  add_max_words(directions);
  add_out(directions, "Output JSON (stdout when omitted)");

  auto* audit = app.add_subcommand("audit", "MWEAT scores, aggregate statistic and permutation p-value");
  add_input(audit, "embeddings", c.embeddings, "Gendered-language embeddings (.vec)");
  add_input(audit, "lexicon", c.lexicon, "Gender lexicon (JSON)");
  audit->add_option("--n-perm", c.n_perm, "Permutation count")->check(CLI::Range(std::size_t{100}, std::size_t{100000000}));
  add_seed(audit);
  add_max_words(audit);
  audit->add_flag("--signed", c.is_signed, "Include signed per-word scores");
  add_out(audit, "Output JSON (stdout when omitted)");

  auto* mitigate = app.add_subcommand("mitigate", "Run one mitigation pipeline");
  mitigate->add_option("--method", c.method, "shift_ori|shift_en|de_align|hybrid_ori|hybrid_en")
      ->check(CLI::IsMember({"shift_ori", "shift_en", "de_align", "hybrid_ori", "hybrid_en"}));
  add_input(mitigate, "embeddings", c.embeddings, "Gendered-language embeddings (.vec)");
  add_input(mitigate, "embeddings-en", c.embeddings_en, "English embeddings (.vec)");
  add_input(mitigate, "lexicon", c.lexicon, "Gender lexicon (JSON)");
  add_input(mitigate, "lexicon-en", c.lexicon_en, "English lexicon (definitional/equalize pairs)");
  add_input(mitigate, "seed-dict", c.seed_dict, "Seed dictionary for re-alignment (identical strings when omitted)");
  add_ridge(mitigate);
  add_seed(mitigate);
  add_max_words(mitigate);
  mitigate->add_flag("--renormalize", c.renormalize, "Rescale mitigated vectors to unit length");
  add_out(mitigate, "Output directory");

  auto* similarity = app.add_subcommand("eval-similarity", "Word-similarity Pearson correlation");
  add_input(similarity, "embeddings", c.embeddings, "Embeddings (.vec)");
  add_input(similarity, "dataset", c.dataset, "word1<TAB>word2<TAB>score file");
  add_max_words(similarity);
  add_out(similarity, "Output JSON (stdout when omitted)");

  auto* translation = app.add_subcommand("eval-translation", "Word translation precision at 1 and 5");
  add_input(translation, "embeddings", c.embeddings, "Gendered-language embeddings (.vec)");
  add_input(translation, "embeddings-en", c.embeddings_en, "English embeddings (.vec)");
  add_input(translation, "dict", c.dict, "Evaluation dictionary");
  translation->add_flag("--csls", c.csls, "Rank with CSLS instead of cosine");
  translation->add_flag("--reverse", c.reverse, "Translate English into the gendered language");
  add_max_words(translation);
  add_out(translation, "Output JSON; details go to <stem>.details.csv");

  auto* pairs = app.add_subcommand("eval-pairs", "Gendered occupation analogy MRR and ASD");
  add_input(pairs, "embeddings", c.embeddings, "Gendered-language embeddings (.vec)");
  add_input(pairs, "embeddings-en", c.embeddings_en, "English embeddings (.vec)");
  add_input(pairs, "lexicon", c.lexicon, "Gender lexicon with adjective and occupation entries");
  pairs->add_flag("--restrict", c.restrict_pairs, "Rank occupation forms only");
  add_max_words(pairs);
  add_out(pairs, "Output JSON (stdout when omitted)");

  auto* projections = app.add_subcommand("export-projections", "Lexicon projections on both directions (CSV)");
  add_input(projections, "embeddings", c.embeddings, "Gendered-language embeddings (.vec)");
  add_input(projections, "lexicon", c.lexicon, "Gender lexicon (JSON)");
  add_input(projections, "embeddings-en", c.embeddings_en, "English embeddings for bilingual directions");
  add_input(projections, "lexicon-en", c.lexicon_en, "English lexicon");
  add_ridge(projections);
  add_max_words(projections);
  add_out(projections, "Output CSV (stdout when omitted)");

  auto* correlate = app.add_subcommand("correlate", "Spearman correlation of per-occupation bias across languages");
  add_input(correlate, "embeddings", c.embeddings, "Gendered-language embeddings (.vec)");
  add_input(correlate, "embeddings-en", c.embeddings_en, "English embeddings (.vec)");
  add_input(correlate, "lexicon", c.lexicon, "Gender lexicon (JSON)");
  add_input(correlate, "lexicon-en", c.lexicon_en, "English lexicon with attribute lists");
  add_max_words(correlate);
  add_out(correlate, "Output JSON (stdout when omitted)");

  // CLI11 expects argv-style input without the program name, last first.
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    if (!args.empty() && !args.front().empty() && args.front()[0] != '-' &&
        app.get_subcommand_no_throw(args.front()) == nullptr) {
      err << "error: unknown subcommand '" << args.front() << "'\n\n" << app.help();
      return 1;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }
  c.subcommand = app.get_subcommands().front()->get_name();

  try {
    check_inputs_exist(c);
    if (c.subcommand == "directions") return cmd_directions(c, out);
    if (c.subcommand == "audit") return cmd_audit(c, out);
    if (c.subcommand == "mitigate") return cmd_mitigate(c, out);
    if (c.subcommand == "eval-similarity") return cmd_eval_similarity(c, out);
    if (c.subcommand == "eval-translation") return cmd_eval_translation(c, out);
    if (c.subcommand == "eval-pairs") return cmd_eval_pairs(c, out);
    if (c.subcommand == "export-projections") return cmd_export_projections(c, out);
    if (c.subcommand == "correlate") return cmd_correlate(c, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  err << app.help();
  return 1;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace gbias::cli
