#include <doctest.h>

#include "turbotwin/model_io.hpp"
#include "test_util.hpp"

using namespace twin;
using twin::test::random_matrix;

TEST_SUITE_BEGIN("model_io");

namespace {

TrainedModel sample_model(Rng& rng) {
    TrainedModel model;
    model.metaparams = {1, 2, 3.5e-6};
    model.input_channels = {"a", "b"};
    model.target_channel = "y";
    model.w_out = twin::test::random_vector(feature_dim(2, 1), rng);
    model.normalization.ranges["a"] = {-1.5, 2.5};
    model.normalization.ranges["b"] = {0.0, 1.0};
    model.normalization.ranges["y"] = {3.0, 17.0};
    model.training_stats = {123, 0.00137};
    return model;
}

} // namespace

TEST_CASE("serialize/deserialize round trip predicts bit-identically") {
    Rng rng(55);
    const TrainedModel model = sample_model(rng);
    const TrainedModel restored = deserialize(serialize(model));

    CHECK(restored.metaparams.lookback == model.metaparams.lookback);
    CHECK(restored.metaparams.skip == model.metaparams.skip);
    CHECK(restored.metaparams.alpha == model.metaparams.alpha);
    CHECK(restored.input_channels == model.input_channels);
    CHECK(restored.normalization.ranges.at("a").min == -1.5);
    CHECK(restored.training_stats.n_train == 123);

    const Matd inputs = random_matrix(2, 30, rng, 0.0, 1.0);
    const auto before = predict(model, inputs);
    const auto after = predict(restored, inputs);
    REQUIRE(before.values.size() == after.values.size());
    for (Index i = 0; i < before.values.size(); ++i)
        CHECK(before.values(i) == after.values(i)); // exact

    // Second round trip is byte-stable too.
    CHECK(serialize(restored) == serialize(model));
}

TEST_CASE("tampered readout length is rejected") {
    Rng rng(56);
    std::string doc = serialize(sample_model(rng));
    const auto pos = doc.find("\"w_out\": [");
    REQUIRE(pos != std::string::npos);
    doc.insert(pos + 10, "0.25, ");
    CHECK_THROWS_WITH_AS((void)deserialize(doc), doctest::Contains("feature dimension"),
                         DataError);
}

TEST_CASE("newer schema versions are rejected explicitly") {
    Rng rng(57);
    std::string doc = serialize(sample_model(rng));
    const auto pos = doc.find("\"version\": 1");
    REQUIRE(pos != std::string::npos);
    doc.replace(pos, 12, "\"version\": 2");
    CHECK_THROWS_WITH_AS((void)deserialize(doc), doctest::Contains("version 2"), DataError);
}

TEST_CASE("garbage and wrong-format documents are rejected") {
    CHECK_THROWS_AS((void)deserialize("not json at all"), DataError);
    CHECK_THROWS_AS((void)deserialize(R"({"format": "something-else", "version": 1})"),
                    DataError);
    CHECK_THROWS_AS((void)deserialize(R"({"format": "turbotwin-model", "version": 1})"),
                    DataError); // missing everything else
}

TEST_CASE("save/load through a file") {
    Rng rng(58);
    const TrainedModel model = sample_model(rng);
    test::TempDir dir("model");
    const std::string path = dir.file("model.json");
    save_model(model, path);
    const TrainedModel loaded = load_model(path);
    CHECK(loaded.w_out == model.w_out);
    CHECK_THROWS_AS((void)load_model(dir.file("missing.json")), DataError);
}

TEST_SUITE_END();
