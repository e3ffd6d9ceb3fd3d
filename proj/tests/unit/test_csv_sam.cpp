#include <doctest.h>

#include <cmath>

#include "deforcge/csv.hpp"
#include "deforcge/error.hpp"
#include "deforcge/sam.hpp"
#include "support/support.hpp"

using namespace deforcge;
using testing::code_of;

namespace {

const char* kToy =
    "#account,kind,compliance,partner\n"
    "#a_x,activity,,\n"
    "#c_x,commodity,,\n"
    "#h_1,household,,\n"
    "row_account,col_account,value\n"
    "c_x,a_x,20\n"
    "c_x,h_1,80\n"
    "a_x,c_x,100\n"
    "h_1,a_x,80\n";

// Random balanced SAM: a random non-negative matrix pushed to balance by RAS.
SocialAccountingMatrix random_sam(testing::Gen& g) {
  std::vector<AccountId> acc{{AccountKind::Activity, "a_1"},  {AccountKind::Activity, "a_2"},
                             {AccountKind::Commodity, "c_1"}, {AccountKind::Commodity, "c_2"},
                             {AccountKind::Factor, "lab"},    {AccountKind::Household, "h"}};
  SocialAccountingMatrix sam(acc, 2019);
  for (std::size_t i = 0; i < sam.size(); ++i)
    for (std::size_t j = 0; j < sam.size(); ++j)
      if (i != j) sam.flow(i, j) = g.uniform(1.0, 50.0);
  return ras_balance(sam, 1e-13, 5000).sam;
}

}  // namespace

TEST_CASE("csv parsing") {
  const auto t = csv::parse("# note\na, b ,c\n\n1,2,3\n", "t");
  CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0][1] == "2");
  CHECK(t.comments.size() == 1);
  CHECK(csv::parse_double("2.5", "x") == 2.5);
  CHECK(code_of([] { csv::parse_double("abc", "x"); }) == ErrorCode::MalformedRecord);
  for (double v : {0.1, 1.0 / 3.0, 5742.04, 1e-300, -2.5e17}) {
    CHECK(csv::parse_double(csv::format_double(v), "rt") == v);
  }
}

TEST_CASE("toy SAM loads with missing cells as zero") {
  const auto sam = read_sam(kToy);
  CHECK(sam.size() == 3);
  int cells = 0, nonzero = 0;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      ++cells;
      nonzero += sam.flow(i, j) != 0.0;
    }
  CHECK(cells == 9);
  CHECK(nonzero == 4);
  CHECK(sam.flow("h_1", "c_x") == 0.0);
  CHECK(check_balance(sam, 1e-9).balanced);
}

TEST_CASE("SAM errors") {
  std::string bad = kToy;
  bad.replace(bad.find("c_x,a_x,20"), 10, "c_x,a_x,abc");
  CHECK(code_of([&] { read_sam(bad); }) == ErrorCode::MalformedRecord);
  CHECK(code_of([&] { read_sam(std::string(kToy) + "c_x,a_x,1\n"); }) == ErrorCode::DuplicateCell);
  CHECK(code_of([&] { read_sam(std::string(kToy) + "zz,a_x,1\n"); }) == ErrorCode::MalformedRecord);
}

TEST_CASE("check_balance") {
  SUBCASE("perturbed cell on a 100 row") {
    auto sam = read_sam(kToy);
    sam.flow(sam.index("a_x"), sam.index("c_x")) += 1.0;
    const auto r = check_balance(sam, 1e-3);
    CHECK_FALSE(r.balanced);
    CHECK(r.relative_imbalance[sam.index("a_x")] == doctest::Approx(1.0 / 101.0));
    CHECK(r.relative_imbalance[sam.index("c_x")] == doctest::Approx(0.01));
    CHECK(r.relative_imbalance[sam.index("h_1")] == 0.0);
  }
  SUBCASE("balanced") {
    const auto r = check_balance(read_sam(kToy), 1e-9);
    CHECK(r.balanced);
    CHECK(r.max_relative_imbalance == 0.0);
  }
  SUBCASE("empty") { CHECK(check_balance(SocialAccountingMatrix{}, 1e-9).balanced); }
}

TEST_CASE("bundled SAMs balance") {
  for (const char* f : {"sam_aggregate.csv", "sam.csv"}) {
    const auto sam = load_sam(testing::data_dir() / f);
    CHECK(sam.size() >= 34);
    CHECK(check_balance(sam, 1e-9).balanced);
    CHECK(lint_taxonomy(sam).empty());
  }
}

TEST_CASE("save/load round trip") {
  testing::Gen g(7);
  const auto sam = random_sam(g);
  const auto back = read_sam(write_sam(sam));
  REQUIRE(back.size() == sam.size());
  CHECK(back.base_year() == 2019);
  for (std::size_t i = 0; i < sam.size(); ++i) {
    CHECK(back.account(i) == sam.account(i));
    for (std::size_t j = 0; j < sam.size(); ++j) CHECK(back.flow(i, j) == sam.flow(i, j));
  }
}

TEST_CASE("RAS") {
  SUBCASE("2x2 textbook case") {
    const auto r = ras_scale({1, 2, 3, 4}, 2, 2, {3, 7}, {3, 7}, 1e-12, 1000);
    // Independent oracle: alternate row and column scaling to a fixed point.
    std::vector<double> m{1, 2, 3, 4};
    for (int it = 0; it < 2000; ++it) {
      for (int i = 0; i < 2; ++i) {
        const double s = (i == 0 ? 3.0 : 7.0) / (m[2 * i] + m[2 * i + 1]);
        m[2 * i] *= s;
        m[2 * i + 1] *= s;
      }
      for (int j = 0; j < 2; ++j) {
        const double s = (j == 0 ? 3.0 : 7.0) / (m[j] + m[2 + j]);
        m[j] *= s;
        m[2 + j] *= s;
      }
    }
    for (int k = 0; k < 4; ++k) CHECK(r.values[k] == doctest::Approx(m[k]).epsilon(1e-9));
    CHECK(std::abs(r.values[0] + r.values[1] - 3.0) <= 1e-10);
    CHECK(std::abs(r.values[2] + r.values[3] - 7.0) <= 1e-10);
    CHECK(std::abs(r.values[0] + r.values[2] - 3.0) <= 1e-10);
    CHECK(std::abs(r.values[1] + r.values[3] - 7.0) <= 1e-10);
  }
  SUBCASE("zero line") {
    CHECK(code_of([] { ras_scale({0, 0, 3, 4}, 2, 2, {3, 7}, {3, 7}, 1e-12, 100); }) == ErrorCode::ZeroLine);
  }
  SUBCASE("balanced input is a fixed point") {
    const auto sam = read_sam(kToy);
    const auto r = ras_balance(sam, 1e-12, 100);
    CHECK(r.iterations == 0);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) CHECK(r.sam.flow(i, j) == sam.flow(i, j));
  }
  SUBCASE("idempotent") {
    testing::Gen g(11);
    const auto once = random_sam(g);
    const auto twice = ras_balance(once, 1e-13, 5000).sam;
    for (std::size_t i = 0; i < once.size(); ++i)
      for (std::size_t j = 0; j < once.size(); ++j)
        CHECK(twice.flow(i, j) == doctest::Approx(once.flow(i, j)).epsilon(1e-12));
  }
}

TEST_CASE("disaggregate_accounts") {
  const auto sam = read_sam(kToy);
  SUBCASE("share zero") {
    const auto out = disaggregate_accounts(sam, {{{"c_x", 0.0}}}, {});
    CHECK(out.size() == 4);
    CHECK(out.row_sum(out.index("c_x_nc")) == 0.0);
    CHECK(out.col_sum(out.index("c_x_nc")) == 0.0);
    CHECK(out.flow("c_x_c", "h_1") == 80.0);
    CHECK(out.flow("a_x", "c_x_c") == 100.0);
  }
  SUBCASE("2.84 percent") {
    const auto out = disaggregate_accounts(sam, {{{"a_x", 0.0284}}}, {});
    CHECK(out.flow("c_x", "a_x_nc") == doctest::Approx(20 * 0.0284));
    CHECK(out.flow("a_x_nc", "c_x") == doctest::Approx(2.84).epsilon(1e-14));
    CHECK(out.flow("a_x_c", "c_x") == doctest::Approx(97.16).epsilon(1e-14));
    CHECK(out.flow("a_x_c", "c_x") + out.flow("a_x_nc", "c_x") == doctest::Approx(100.0).epsilon(1e-15));
  }
  SUBCASE("linked product inherits its raw material's share") {
    const auto out = disaggregate_accounts(sam, {{{"c_x", 0.25}}}, {{"a_x", "c_x"}});
    // a_x splits 25/75 as well; cells between two split accounts split both ways.
    double nc = 0.0, total = 0.0;
    for (const char* r : {"a_x_c", "a_x_nc"})
      for (const char* c : {"c_x_c", "c_x_nc"}) total += out.flow(r, c);
    nc = out.flow("a_x_nc", "c_x_c") + out.flow("a_x_nc", "c_x_nc");
    CHECK(total == doctest::Approx(100.0).epsilon(1e-14));
    CHECK(nc == doctest::Approx(25.0).epsilon(1e-14));
    CHECK(out.flow("h_1", "a_x_nc") == doctest::Approx(20.0));
    CHECK(check_balance(out, 1e-12).balanced);
  }
  SUBCASE("errors") {
    CHECK(code_of([&] { disaggregate_accounts(sam, {{{"c_x", 1.2}}}, {}); }) == ErrorCode::ShareOutOfRange);
    CHECK(code_of([&] { disaggregate_accounts(sam, {{{"c_x", 0.1}}}, {{"a_x", "c_y"}}); }) ==
          ErrorCode::MissingLinkage);
    auto with_tax = read_sam(
        "#account,kind,compliance,partner\n#a_x,activity,,\n#tax_s,tax,,\nrow_account,col_account,value\n"
        "tax_s,a_x,1\na_x,tax_s,1\n");
    CHECK(code_of([&] { disaggregate_accounts(with_tax, {{{"tax_s", 0.1}}}, {}); }) == ErrorCode::InvalidConfig);
  }
}

TEST_CASE("splitting conserves cells and balance for random shares") {
  testing::Gen g(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const auto sam = random_sam(g);
    NonCompliantShareTable shares{{{"c_1", g.uniform(0, 1)}, {"a_2", g.uniform(0, 1)}, {"lab", g.uniform(0, 1)}}};
    const auto out = disaggregate_accounts(sam, shares, {{"a_1", "c_1"}});
    CHECK(check_balance(out, 1e-12).balanced);
    // Per-cell conservation: summing twins back recovers each original cell.
    for (std::size_t i = 0; i < sam.size(); ++i) {
      for (std::size_t j = 0; j < sam.size(); ++j) {
        double sum = 0.0;
        for (std::size_t r = 0; r < out.size(); ++r) {
          if (base_name(out.account(r)) != sam.account(i).name) continue;
          for (std::size_t c = 0; c < out.size(); ++c)
            if (base_name(out.account(c)) == sam.account(j).name) sum += out.flow(r, c);
        }
        CHECK(std::abs(sum - sam.flow(i, j)) <= 1e-12 * std::max(1.0, sam.flow(i, j)));
      }
    }
  }
}
