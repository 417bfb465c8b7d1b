#include <doctest.h>

#include "turbotwin/dataset.hpp"
#include "turbotwin/dataset_io.hpp"
#include "test_util.hpp"

using namespace twin;

TEST_SUITE_BEGIN("dataset_io");

TEST_CASE("sectioned run: channels keep their native rates") {
    test::TempDir dir("io");
    const std::string path = dir.file("run.csv");
    std::string content = "# run_id: bench-7\n# ambient_temperature_c: 21.5\n";
    content += "## channel,thrust,N,1000\n";
    for (int i = 0; i < 200; ++i) content += format_double(100.0 + i) + "\n";
    content += "## channel,rpm,frac,10\n0.5\n0.6\n";
    test::write_file(path, content);

    const RawRun run = load_run(path);
    CHECK(run.run_id == "bench-7");
    CHECK(run.meta.at("ambient_temperature_c") == "21.5");
    REQUIRE(run.channels.size() == 2);
    CHECK(run.channels[0].name == "thrust");
    CHECK(run.channels[0].unit == "N");
    CHECK(run.channels[0].rate == 1000.0);
    CHECK(run.channels[0].samples.size() == 200);
    CHECK(run.channels[1].rate == 10.0);

    // 1000 -> 10 S/s: each aligned sample is the mean of 100 raw ones.
    const RunDataset ds = align(run, 10.0);
    REQUIRE(ds.length() == 2);
    CHECK(ds.data(0, 0) == doctest::Approx(100.0 + 49.5));
    CHECK(ds.data(0, 1) == doctest::Approx(200.0 + 49.5));
    CHECK(ds.units.at("thrust") == "N");
}

TEST_CASE("one short channel: length is established only by align") {
    test::TempDir dir("io");
    const std::string path = dir.file("run.csv");
    test::write_file(path, "## channel,x,V,10\n1\n2\n3\n4\n5\n");
    const RawRun run = load_run(path);
    REQUIRE(run.channels.size() == 1);
    CHECK(run.channels[0].samples.size() == 5);
    CHECK(align(run, 10.0).length() == 5);
}

TEST_CASE("load errors carry the row and column location") {
    test::TempDir dir("io");
    const std::string path = dir.file("bad.csv");

    test::write_file(path, "## channel,x,V,10\n1.0\noops\n");
    CHECK_THROWS_WITH_AS((void)load_run(path), doctest::Contains(":3"), DataError);

    test::write_file(path, "## channel,x,V,10\n1.0\nnan\n");
    CHECK_THROWS_WITH_AS((void)load_run(path), doctest::Contains("non-finite"), DataError);

    test::write_file(path, "## channel,x,V\n1.0\n");
    CHECK_THROWS_WITH_AS((void)load_run(path), doctest::Contains("channel header"), DataError);

    test::write_file(path, "time,a\n0.0,1.0\n0.1,zzz\n");
    CHECK_THROWS_WITH_AS((void)load_run(path), doctest::Contains(":3:col2"), DataError);

    test::write_file(path, "1.0\n2.0\n");
    CHECK_THROWS_AS((void)load_run(path), DataError); // no header at all
}

TEST_CASE("empty data sections are errors, not empty datasets") {
    test::TempDir dir("io");
    const std::string path = dir.file("empty.csv");
    test::write_file(path, "## channel,x,V,10\n");
    CHECK_THROWS_WITH_AS((void)load_run(path), doctest::Contains("empty"), DataError);

    test::write_file(path, "# run_id: nothing\n");
    CHECK_THROWS_WITH_AS((void)load_run(path), doctest::Contains("no data"), DataError);
}

TEST_CASE("wide run round-trips byte-identically through save and load") {
    RunDataset ds;
    ds.run_id = "wide-1";
    ds.rate = 200.0;
    ds.channel_names = {"a", "b"};
    ds.units["a"] = "N";
    ds.meta["note"] = "hello";
    ds.data.resize(2, 4);
    ds.data << 0.1, 0.2, 0.30000000000000004, -4.0,
               1e-17, 2.5, 3.5, 1234.5678;

    test::TempDir dir("io");
    const std::string path = dir.file("wide.csv");
    save_run(ds, path);
    const std::string first = test::read_file(path);

    const RawRun run = load_run(path);
    CHECK(run.run_id == "wide-1");
    CHECK(run.meta.at("note") == "hello");
    REQUIRE(run.channels.size() == 2);
    CHECK(run.channels[0].rate == doctest::Approx(200.0));
    CHECK(run.channels[0].unit == "N");

    // Exact value round trip, then exact byte round trip.
    const RunDataset ds2 = align(run, run.channels[0].rate);
    REQUIRE(ds2.length() == 4);
    for (Index c = 0; c < 2; ++c)
        for (Index i = 0; i < 4; ++i) CHECK(ds2.data(c, i) == ds.data(c, i));

    const std::string path2 = dir.file("wide2.csv");
    RunDataset resaved = ds2;
    resaved.run_id = ds.run_id;
    resaved.meta = run.meta;
    save_run(resaved, path2);
    CHECK(test::read_file(path2) == first);
}

TEST_CASE("wide runs must have uniform time spacing") {
    test::TempDir dir("io");
    const std::string path = dir.file("jitter.csv");
    test::write_file(path, "time,x\n0.0,1\n0.1,2\n0.25,3\n");
    CHECK_THROWS_WITH_AS((void)load_run(path), doctest::Contains("uniformly"), DataError);

    test::write_file(path, "time,x\n0.0,1\n");
    CHECK_THROWS_WITH_AS((void)load_run(path), doctest::Contains("at least 2 rows"), DataError);
}

TEST_SUITE_END();
