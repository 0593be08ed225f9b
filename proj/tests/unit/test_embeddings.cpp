#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>

#include "../support/fixtures.hpp"
#include "viramem/embeddings.hpp"
#include "viramem/log.hpp"

using namespace viramem;
using namespace viramem::embeddings;
using Words = std::vector<std::string>;

namespace {

const EmbeddingTable& toy() {
  static const EmbeddingTable t =
      load_embeddings(viramem::testing::fixture_dir() / "embeddings" / "toy_10word_100d.txt");
  return t;
}

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
  const auto dir = std::filesystem::temp_directory_path() / "viramem_embedding_tests";
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream(path) << content;
  return path;
}

std::string row(const std::string& token, int nonzero, int dim) {
  std::string s = token;
  for (int i = 0; i < dim; ++i) s += i == 0 ? " " + std::to_string(nonzero) : " 0";
  return s + "\n";
}

}  // namespace

TEST(Embeddings, ToyTableLoads) {
  EXPECT_EQ(toy().size(), 10u);
  EXPECT_EQ(toy().dimension(), 100);
}

TEST(Embeddings, ThreeLineFile) {
  const auto path = write_temp("three.txt", row("a", 1, 100) + row("b", 2, 100) + row("c", 3, 100));
  EXPECT_EQ(load_embeddings(path).size(), 3u);
}

TEST(Embeddings, WrongComponentCountNamesLine) {
  const auto path = write_temp("short.txt", row("a", 1, 100) + row("b", 2, 99) + row("c", 3, 100));
  try {
    load_embeddings(path);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Embeddings, DuplicateFirstWinsWithWarning) {
  std::vector<std::string> warnings;
  auto previous = set_warning_sink([&](const std::string& m) { warnings.push_back(m); });
  const auto path = write_temp("dup.txt", row("a", 1, 100) + row("a", 7, 100));
  const auto t = load_embeddings(path);
  set_warning_sink(previous);
  EXPECT_EQ(t.size(), 1u);
  EXPECT_EQ((*t.find("a"))(0), 1.0f);
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(Embeddings, VocabularyFilter) {
  const std::unordered_set<std::string> vocab{"rock", "stone"};
  LoadOptions opt;
  opt.vocabulary = &vocab;
  const auto t = load_embeddings(viramem::testing::fixture_dir() / "embeddings" / "toy_10word_100d.txt", opt);
  EXPECT_EQ(t.size(), 2u);
  EXPECT_TRUE(t.contains("rock"));
  EXPECT_FALSE(t.contains("ground"));
}

TEST(Cosine, Identities) {
  Eigen::VectorXd u(4);
  u << 0.3, -1.2, 2.5, 0.7;
  EXPECT_NEAR(cosine(u, u), 1.0, 1e-15);
  EXPECT_NEAR(cosine(u, (-u).eval()), -1.0, 1e-15);
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(100), e2 = Eigen::VectorXd::Zero(100);
  e1(0) = 1;
  e2(1) = 1;
  EXPECT_EQ(cosine(e1, e2), 0.0);
  EXPECT_THROW(cosine(e1, Eigen::VectorXd::Zero(100).eval()), NumericError);
}

TEST(BestMatch, RockPrefersStoneOverGround) {
  const auto m = best_match("rock", {"stone", "ground"}, toy());
  ASSERT_TRUE(m);
  EXPECT_EQ(m->label, "stone");
  EXPECT_DOUBLE_EQ(m->cosine, 20.0 / 25.0);
}

TEST(BestMatch, SelfMatch) {
  const auto m = best_match("stone", {"stone", "tower"}, toy());
  ASSERT_TRUE(m);
  EXPECT_EQ(m->label, "stone");
  EXPECT_DOUBLE_EQ(m->cosine, 1.0);
}

TEST(BestMatch, TiesKeepFirstLabel) {
  // stone.sky = stone.rock = 20 / 25.
  EXPECT_EQ(best_match("stone", {"sky", "rock"}, toy())->label, "sky");
  EXPECT_EQ(best_match("stone", {"rock", "sky"}, toy())->label, "rock");
}

TEST(BestMatch, OutOfVocabularyIsNoMatch) {
  EXPECT_FALSE(best_match("unicorn", {"stone"}, toy()));
  EXPECT_FALSE(best_match("stone", {"unicorn", "pegasus"}, toy()));
}

TEST(BestMatch, UnionNeverLowersBestCosine) {
  const Words a{"ground", "sky"}, b{"tower", "fruit", "water"};
  Words both = a;
  both.insert(both.end(), b.begin(), b.end());
  for (const auto& t : toy().tokens()) {
    const double u = best_match(t, both, toy())->cosine;
    EXPECT_GE(u, best_match(t, a, toy())->cosine);
    EXPECT_GE(u, best_match(t, b, toy())->cosine);
  }
}

TEST(Consistency, HandComputedCases) {
  const auto& t = toy();
  {
    const auto s = consistency_score({"stone"}, {"stone"}, t);
    EXPECT_DOUBLE_EQ(*s.value, 1.0);
  }
  {
    const auto s = consistency_score({"rock", "rock"}, {"rock"}, t);
    EXPECT_DOUBLE_EQ(*s.value, 1.0);
    EXPECT_EQ(s.matched_pairs.size(), 2u);
  }
  {
    const auto s = consistency_score({"rock"}, {"stone", "ground"}, t);
    EXPECT_DOUBLE_EQ(*s.value, 0.8);
    EXPECT_EQ(s.matched_pairs[0].label, "stone");
  }
  {
    // dragon -> sculpture 20/21, water -> sculpture 14/15, rock -> ground
    // 9/25; unicorn is out of vocabulary.
    const auto s = consistency_score({"dragon", "water", "rock", "unicorn"}, {"sculpture", "ground", "sky"}, t);
    EXPECT_DOUBLE_EQ(*s.value, (20.0 / 21.0 + 14.0 / 15.0 + 9.0 / 25.0) / 3.0);
    EXPECT_EQ(s.skipped_tokens, 1u);
    EXPECT_EQ(s.matched_pairs[2].label, "ground");
  }
  {
    const auto s = consistency_score({"tower"}, {"dragon", "ground"}, t);
    EXPECT_DOUBLE_EQ(*s.value, 14.0 / 15.0);
  }
  {
    // Negative similarities are kept as-is.
    const auto s = consistency_score({"sky"}, {"ground"}, t);
    EXPECT_DOUBLE_EQ(*s.value, -9.0 / 25.0);
  }
}

TEST(Consistency, UndefinedWithoutMatches) {
  EXPECT_FALSE(consistency_score({"stone"}, {}, toy()).value);
  EXPECT_FALSE(consistency_score({"unicorn"}, {"stone"}, toy()).value);
  EXPECT_FALSE(consistency_score({}, {"stone"}, toy()).value);
}

TEST(Consistency, InvariantToLabelOrderAndDuplicates) {
  const Words tokens{"dragon", "rock", "water", "sky", "fruit"};
  const auto base = consistency_score(tokens, {"sculpture", "ground", "tower"}, toy());
  const auto shuffled = consistency_score(tokens, {"tower", "ground", "sculpture", "ground"}, toy());
  EXPECT_DOUBLE_EQ(*base.value, *shuffled.value);
}

TEST(Consistency, RealEmbeddingFileWhenPresent) {
  const char* env = std::getenv("VIRAMEM_GLOVE_PATH");
  if (!env || !std::filesystem::exists(env)) GTEST_SKIP() << "VIRAMEM_GLOVE_PATH not set";
  const std::unordered_set<std::string> vocab{"rock", "stone", "ground"};
  LoadOptions opt;
  opt.vocabulary = &vocab;
  const auto t = load_embeddings(env, opt);
  EXPECT_EQ(best_match("rock", {"stone", "ground"}, t)->label, "stone");
}
