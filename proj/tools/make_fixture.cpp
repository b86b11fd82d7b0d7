// Writes the planted-bias synthetic fixture as files the CLI can consume.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "gbias/gbias.hpp"

namespace fs = std::filesystem;

namespace {

void write_dictionary(const gbias::BilingualDictionary& dict, const fs::path& path) {
  std::ofstream out(path);
  for (const auto& [src, targets] : dict.entries()) {
    for (const auto& t : targets) out << src << '\t' << t << '\n';
  }
  if (!out) throw gbias::IoError("write failure on " + path.string());
}

void write_json(const nlohmann::json& j, const fs::path& path) {
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw gbias::IoError("write failure on " + path.string());
}

// Human scores are a noisy monotone function of the clean cosine.
void write_similarity(const gbias::EmbeddingSpace& space, std::uint64_t seed, const fs::path& path) {
  std::mt19937_64 rng(seed ^ 0x5eedULL);
  std::uniform_int_distribution<std::size_t> pick(0, space.size() - 1);
  std::normal_distribution<double> jitter(0.0, 0.05);
  std::ofstream out(path);
  for (int i = 0; i < 60; ++i) {
    const auto a = pick(rng);
    auto b = pick(rng);
    if (a == b) b = (b + 1) % space.size();
    const double score = 4.0 * (gbias::cosine(space.row(a), space.row(b)) + jitter(rng)) + 2.0;
    out << space.word(a) << '\t' << space.word(b) << '\t' << gbias::csv::number(score) << '\n';
  }
  if (!out) throw gbias::IoError("write failure on " + path.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Write the planted-bias synthetic fixture"};
  gbias::synthetic::FixtureOptions options;
  std::string out_dir = "fixture";
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--seed", options.seed, "Generator seed");
  app.add_option("--dim", options.dim, "Dimension");
  app.add_option("--vocabulary", options.vocabulary, "Source vocabulary size");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto fx = gbias::synthetic::make_fixture(options);
    const fs::path dir(out_dir);
    fs::create_directories(dir);
    gbias::save_text_embeddings(fx.source, dir / "src.vec");
    gbias::save_text_embeddings(fx.english, dir / "en.vec");
    write_json(gbias::lexicon_to_json(fx.lexicon), dir / "lexicon.json");
    write_json(gbias::lexicon_to_json(fx.english_lexicon), dir / "lexicon_en.json");
    write_dictionary(fx.seed_dictionary, dir / "seed.dict");
    write_dictionary(fx.eval_dictionary, dir / "eval.dict");
    write_similarity(fx.source, options.seed, dir / "similarity.tsv");
  } catch (const gbias::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
