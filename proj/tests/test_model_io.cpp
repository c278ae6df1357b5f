#include <gtest/gtest.h>

#include <fstream>

#include "test_util.hpp"
#include "wlogit/error.hpp"
#include "wlogit/model_io.hpp"

using namespace wlogit;
using wlogit::testing::gaussian_matrix;
using wlogit::testing::logistic_data;
using wlogit::testing::scratch_dir;

namespace {

WLogitModel small_model(std::uint64_t seed) {
    Rng rng(seed);
    Vector beta = Vector::Zero(12);
    beta.head(2) << 1.7, -1.3;
    Dataset d = logistic_data(50, 12, beta, rng);
    d.X *= 3.0;
    FitConfig c;
    c.n_lambda = 8;
    WLogitModel m = fit(d, c);
    for (int j = 0; j < 12; ++j) m.feature_names.push_back("gene_" + std::to_string(j));
    return m;
}

}  // namespace

TEST(ModelIo, RoundTripIsBitExact) {
    const WLogitModel m = small_model(1);
    const WLogitModel r = deserialize_model(serialize_model(m));
    EXPECT_TRUE((r.beta_hat.array() == m.beta_hat.array()).all());
    EXPECT_TRUE((r.beta_tilde_hat.array() == m.beta_tilde_hat.array()).all());
    EXPECT_TRUE((r.beta_tilde0_hat.array() == m.beta_tilde0_hat.array()).all());
    EXPECT_TRUE((r.standardization.center.array() == m.standardization.center.array()).all());
    EXPECT_TRUE((r.standardization.scale.array() == m.standardization.scale.array()).all());
    EXPECT_EQ(r.lambda_hat, m.lambda_hat);
    EXPECT_EQ(r.loglik, m.loglik);
    EXPECT_EQ(r.k_hat, m.k_hat);
    EXPECT_EQ(r.m_hat, m.m_hat);
    EXPECT_EQ(r.gamma_k, m.gamma_k);
    EXPECT_EQ(r.gamma_m, m.gamma_m);
    EXPECT_EQ(r.support, m.support);
    EXPECT_EQ(r.feature_names, m.feature_names);
    EXPECT_EQ(r.h_convention, m.h_convention);
    EXPECT_EQ(serialize_model(r), serialize_model(m));
}

TEST(ModelIo, SavedModelPredictsIdentically) {
    const WLogitModel m = small_model(2);
    const auto dir = scratch_dir("model");
    save_model(m, dir / "m.json");
    const WLogitModel r = load_model(dir / "m.json");
    Rng rng(3);
    const Matrix x = gaussian_matrix(25, 12, rng) * 3.0;
    const Vector a = predict(m, x).probabilities;
    const Vector b = predict(r, x).probabilities;
    EXPECT_TRUE((a.array() == b.array()).all());
    std::filesystem::remove_all(dir);
}

TEST(ModelIo, RejectsMalformedInput) {
    EXPECT_THROW(deserialize_model("not json"), DataError);
    EXPECT_THROW(deserialize_model("{}"), DataError);
    EXPECT_THROW(deserialize_model(R"({"format":"other","version":1})"), DataError);
    std::string text = serialize_model(small_model(4));
    const auto pos = text.find("\"version\": 1");
    ASSERT_NE(pos, std::string::npos);
    text.replace(pos, 12, "\"version\": 99");
    EXPECT_THROW(deserialize_model(text), DataError);
    EXPECT_THROW(load_model("/nonexistent/dir/model.json"), DataError);
}

TEST(ModelIo, AtomicWriteLeavesNoTemporaries) {
    const auto dir = scratch_dir("atomic");
    write_file_atomic(dir / "out.txt", "first\n");
    write_file_atomic(dir / "out.txt", "second\n");
    std::ifstream in(dir / "out.txt");
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "second");
    int files = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        (void)e;
        ++files;
    }
    EXPECT_EQ(files, 1);
    EXPECT_ANY_THROW(write_file_atomic(dir / "missing" / "x.txt", "x"));
    std::filesystem::remove_all(dir);
}
