#include <prosumpi/backtest.hpp>
#include <prosumpi/csv.hpp>
#include <prosumpi/snapshot.hpp>
#include <prosumpi/synthetic.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace prosumpi {
namespace {

TimeSeries parse(const std::string& text) {
    std::istringstream in(text);
    return parse_csv(in, "test.csv");
}

std::string error_of(const std::string& text) {
    try {
        (void)parse(text);
    } catch (const IngestionError& e) {
        return e.what();
    }
    return {};
}

TEST(CsvTest, ParsesWithAndWithoutHeader) {
    const auto a = parse("timestamp_ms,power_w\n1000,1.5\n1020,-2\n\n1040,3e3\n");
    EXPECT_EQ(a.start_ms, 1000);
    EXPECT_EQ(a.period_ms, 20);
    EXPECT_EQ(a.values, (std::vector<double>{1.5, -2.0, 3000.0}));
    const auto b = parse("0,1\r\n1000,2\r\n");
    EXPECT_EQ(b.period_ms, 1000);
    EXPECT_EQ(b.values.size(), 2u);
}

TEST(CsvTest, ReportsLineNumbers) {
    EXPECT_NE(error_of("ts,p\n0,1\n20,2\n60,3\n").find("test.csv:4"), std::string::npos);
    EXPECT_NE(error_of("ts,p\n0,1\n20,2\n60,3\n").find("gap"), std::string::npos);
    EXPECT_NE(error_of("0,1\n20,2\n20,3\n").find("test.csv:3"), std::string::npos);
    EXPECT_NE(error_of("0,1\n20,abc\n").find("test.csv:2"), std::string::npos);
    EXPECT_NE(error_of("0,1\n20,nan\n").find("malformed"), std::string::npos);
    EXPECT_FALSE(error_of("").empty());
    EXPECT_FALSE(error_of("ts,p\n").empty());
    EXPECT_FALSE(error_of("0,1\n").empty());
    EXPECT_FALSE(error_of("0,1\n20,2\n10,3\n").empty());
}

TEST(CsvTest, ExpectedPeriodIsEnforced) {
    std::istringstream in("0,1\n40,2\n");
    EXPECT_THROW(parse_csv(in, "x", 20), IngestionError);
}

TEST(CsvTest, RoundTripIsExact) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(0.0, 1e5);
    TimeSeries ts{1'700'000'000'000, 20, {}};
    for (int i = 0; i < 5000; ++i) ts.values.push_back(g(rng));
    ts.values.push_back(0.1);
    ts.values.push_back(-0.0);
    ts.values.push_back(1e-300);
    std::stringstream buf;
    write_csv(ts, buf);
    const auto back = parse_csv(buf);
    EXPECT_EQ(back.start_ms, ts.start_ms);
    EXPECT_EQ(back.period_ms, ts.period_ms);
    EXPECT_EQ(back.values, ts.values);
}

TEST(CsvTest, MissingFileIsIngestionError) {
    EXPECT_THROW(read_csv("/nonexistent/dir/file.csv"), IngestionError);
}

TEST(SyntheticTest, PureCosineRepeatsDaily) {
    auto p = SyntheticProfile::defaults(ProfileKind::office);
    p.noise_sd_w = 0.0;
    p.pv_event_rate_per_h = 0.0;
    const auto ts = generate(p, 2 * 86400.0, 60'000);
    const std::size_t day = 86400 / 60;
    ASSERT_EQ(ts.size(), 2 * day);
    for (std::size_t i = 0; i < day; ++i) ASSERT_EQ(ts.values[i], ts.values[i + day]);
    const std::size_t peak = static_cast<std::size_t>(p.peak_hour * 60);
    EXPECT_DOUBLE_EQ(ts.values[peak], p.base_w + p.diurnal_amplitude_w);
}

TEST(SyntheticTest, EvStationUsesDiscreteLevels) {
    auto p = SyntheticProfile::defaults(ProfileKind::ev_station, 3);
    p.base_w = 0.0;
    p.diurnal_amplitude_w = 0.0;
    p.noise_sd_w = 0.0;
    p.ev_ramp_s = 0.0;
    p.ev_taper_fraction = 0.0;
    p.ev_session_rate_per_h = 20.0;
    p.ev_session_mean_s = 120.0;
    const auto ts = generate(p, 3600.0, 1000);
    std::set<double> seen(ts.values.begin(), ts.values.end());
    for (double v : seen) EXPECT_TRUE(v == 0.0 || v == 50e3 || v == 100e3 || v == 150e3) << v;
    EXPECT_GE(seen.size(), 3u);
}

TEST(SyntheticTest, DeterministicPerSeed) {
    for (auto kind : {ProfileKind::office, ProfileKind::ev_station, ProfileKind::heat_pump, ProfileKind::ar1}) {
        const auto a = generate(SyntheticProfile::defaults(kind, 7), 120.0, 20);
        const auto b = generate(SyntheticProfile::defaults(kind, 7), 120.0, 20);
        const auto c = generate(SyntheticProfile::defaults(kind, 8), 120.0, 20);
        EXPECT_EQ(a.values, b.values) << to_string(kind);
        EXPECT_NE(a.values, c.values) << to_string(kind);
        EXPECT_EQ(a.size(), 6000u);
    }
    EXPECT_THROW(generate(SyntheticProfile{}, 0.0, 20), ConfigError);
    EXPECT_THROW(generate(SyntheticProfile{}, 1.01, 20), ConfigError);
    EXPECT_THROW(parse_profile_kind("factory"), ConfigError);
}

struct SnapshotFixture : ::testing::Test {
    TimeSeries data;
    Estimator est;
    void SetUp() override {
        data = generate(SyntheticProfile::defaults(ProfileKind::ev_station, 6), 300.0, 20);
        EstimatorConfig c;
        c.variant = ModelVariant::A;
        c.clusters = 8;
        c.features.use_time_of_day = true;
        c.forgetting = {0.02, 60};
        est = Estimator::batch_train(c, data.slice(0, 5000));
        for (std::size_t i = 5000; i < 6000; ++i) est.observe(data.timestamp(i), data.values[i]);
    }
};

TEST_F(SnapshotFixture, RoundTripContinuesBitExactly) {
    const auto path = std::filesystem::temp_directory_path() / "prosumpi_snapshot_test.bin";
    save_snapshot(est, path);
    auto restored = load_snapshot(path);
    std::filesystem::remove(path);
    EXPECT_EQ(serialize_snapshot(restored), serialize_snapshot(est));
    const std::vector<double> alphas{0.99, 0.9999};
    for (std::size_t i = 6000; i < data.size(); ++i) {
        const auto a = est.step(data.timestamp(i), data.values[i], alphas);
        const auto b = restored.step(data.timestamp(i), data.values[i], alphas);
        ASSERT_EQ(a, b) << i;
    }
}

TEST_F(SnapshotFixture, CorruptionIsDetected) {
    const auto bytes = serialize_snapshot(est);
    auto flipped = bytes;
    flipped[bytes.size() / 2] ^= 0x10;
    EXPECT_THROW(deserialize_snapshot(flipped), SnapshotError);
    EXPECT_THROW(deserialize_snapshot(bytes.substr(0, bytes.size() - 3)), SnapshotError);
    EXPECT_THROW(deserialize_snapshot(bytes + "x"), SnapshotError);
    auto magic = bytes;
    magic[0] = 'X';
    EXPECT_THROW(deserialize_snapshot(magic), SnapshotError);
    EXPECT_THROW(deserialize_snapshot(""), SnapshotError);
    EXPECT_THROW(load_snapshot("/nonexistent/snap.bin"), SnapshotError);
}

TEST_F(SnapshotFixture, VersionMismatchIsNamed) {
    auto bytes = serialize_snapshot(est);
    bytes[kSnapshotMagic.size()] = 2;
    try {
        (void)deserialize_snapshot(bytes);
        FAIL() << "expected SnapshotError";
    } catch (const SnapshotError& e) {
        EXPECT_NE(std::string(e.what()).find("version 2"), std::string::npos);
    }
}

TEST(SnapshotTest, UntrainedEstimatorLoadsThenRefusesToEstimate) {
    const Estimator untrained;
    const auto back = deserialize_snapshot(serialize_snapshot(untrained));
    EXPECT_FALSE(back.trained());
    EXPECT_THROW((void)back.estimate(0.99), StateError);
}

}  // namespace
}  // namespace prosumpi
