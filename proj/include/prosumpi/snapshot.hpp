#pragma once

#include <prosumpi/error.hpp>
#include <prosumpi/estimator.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

namespace prosumpi {

// Snapshot layout (all integers little-endian, doubles as IEEE-754 bit patterns):
//   magic "PSPISNAP" | u32 version | u64 payload length | payload | u64 FNV-1a(payload)
inline constexpr std::string_view kSnapshotMagic = "PSPISNAP";
inline constexpr std::uint32_t kSnapshotVersion = 1;

inline std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace detail {

class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void f64s(std::span<const double> v) {
        u64(v.size());
        for (double x : v) f64(x);
    }
    void bytes(std::string_view s) { buf_.append(s); }
    std::string& str() noexcept { return buf_; }

private:
    std::string buf_;
};

class ByteReader {
public:
    explicit ByteReader(std::string_view data) : data_(data) {}

    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(data_[pos_++]);
    }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
        return v;
    }
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::vector<double> f64s(std::uint64_t max_count) {
        const std::uint64_t n = u64();
        if (n > max_count || n > remaining() / 8) throw SnapshotError("snapshot array length out of range");
        std::vector<double> v(n);
        for (auto& x : v) x = f64();
        return v;
    }
    std::string_view take(std::size_t n) {
        need(n);
        auto s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::size_t remaining() const noexcept { return data_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (data_.size() - pos_ < n) throw SnapshotError("snapshot truncated");
    }
    std::string_view data_;
    std::size_t pos_ = 0;
};

inline constexpr std::uint64_t kMaxSnapshotArray = 1ULL << 32;

inline void write_config(ByteWriter& w, const EstimatorConfig& c) {
    w.u8(static_cast<std::uint8_t>(c.variant));
    w.u64(c.clusters);
    w.f64(c.forgetting.sample_period_s);
    w.f64(c.forgetting.forgetting_time_s);
    w.u64(c.domain_bins);
    w.f64(c.domain_margin);
    w.u64(c.training_window);
    w.u64(c.kmeans.seed);
    w.u64(c.kmeans.max_iterations);
    w.u64(c.kmeans.max_fit_samples);
    w.u8(c.features.use_power ? 1 : 0);
    w.u8(c.features.use_time_of_day ? 1 : 0);
    w.i64(c.features.utc_offset_s);
    w.f64s(c.features.mean);
    w.f64s(c.features.sd);
}

inline EstimatorConfig read_config(ByteReader& r) {
    EstimatorConfig c;
    const auto variant = r.u8();
    if (variant > 1) throw SnapshotError("unknown model variant in snapshot");
    c.variant = static_cast<ModelVariant>(variant);
    c.clusters = r.u64();
    c.forgetting.sample_period_s = r.f64();
    c.forgetting.forgetting_time_s = r.f64();
    c.domain_bins = r.u64();
    c.domain_margin = r.f64();
    c.training_window = r.u64();
    c.kmeans.seed = r.u64();
    c.kmeans.max_iterations = r.u64();
    c.kmeans.max_fit_samples = r.u64();
    c.features.use_power = r.u8() != 0;
    c.features.use_time_of_day = r.u8() != 0;
    c.features.utc_offset_s = r.i64();
    c.features.mean = r.f64s(kMaxFeatures);
    c.features.sd = r.f64s(kMaxFeatures);
    return c;
}

}  // namespace detail

/// Serializes the complete estimator state, including Fenwick node values,
/// so that a restored estimator continues bit-identically.
inline std::string serialize_snapshot(const Estimator& est) {
    const auto& st = est.state();
    detail::ByteWriter p;
    detail::write_config(p, st.config);
    p.u8(st.trained ? 1 : 0);
    if (st.trained) {
        p.f64s(st.clusters.centroids());
        p.u64(st.domain.n_bins());
        p.u64(st.domain.anchor_index());
        p.f64(st.domain.anchor_value());
        p.u64(st.domain.reference_index());
        p.f64(st.domain.reference_value());
        p.f64(st.p_nom);
        p.f64(st.last_power);
        p.i64(st.last_timestamp_ms);
        p.u64(st.last_label);
        p.u64(st.training_counts.size());
        for (auto c : st.training_counts) p.u64(c);
        p.u64(st.histograms.size());
        for (const auto& h : st.histograms) {
            const auto raw = h.raw_state();
            p.u64(raw.update_count);
            p.f64(raw.raw_sum);
            p.f64(raw.scale);
            p.f64s(raw.weights);
            p.f64s(raw.tree);
        }
    }
    detail::ByteWriter out;
    out.bytes(kSnapshotMagic);
    out.u32(kSnapshotVersion);
    out.u64(p.str().size());
    out.bytes(p.str());
    out.u64(fnv1a64(p.str()));
    return std::move(out.str());
}

inline Estimator deserialize_snapshot(std::string_view bytes) {
    detail::ByteReader outer(bytes);
    if (outer.take(kSnapshotMagic.size()) != kSnapshotMagic) throw SnapshotError("not a snapshot file (bad magic)");
    const auto version = outer.u32();
    if (version != kSnapshotVersion)
        throw SnapshotError("snapshot version " + std::to_string(version) + " is not supported (expected " +
                            std::to_string(kSnapshotVersion) + ")");
    const auto length = outer.u64();
    if (length > outer.remaining()) throw SnapshotError("snapshot truncated");
    const auto payload = outer.take(static_cast<std::size_t>(length));
    const auto checksum = outer.u64();
    if (outer.remaining() != 0) throw SnapshotError("trailing bytes after snapshot");
    if (checksum != fnv1a64(payload)) throw SnapshotError("snapshot checksum mismatch");

    detail::ByteReader r(payload);
    EstimatorState st;
    st.config = detail::read_config(r);
    st.trained = r.u8() != 0;
    if (st.trained) {
        auto centroids = r.f64s(detail::kMaxSnapshotArray);
        const auto n_bins = r.u64();
        const auto anchor_index = r.u64();
        const double anchor_value = r.f64();
        const auto ref_index = r.u64();
        const double ref_value = r.f64();
        st.domain = QuantizedDomain::from_parts(n_bins, anchor_index, anchor_value, ref_index, ref_value);
        try {
            st.clusters = ClusterModel(st.config.features, std::move(centroids));
        } catch (const Error& e) {
            throw SnapshotError(std::string("invalid cluster model: ") + e.what());
        }
        st.p_nom = r.f64();
        st.last_power = r.f64();
        st.last_timestamp_ms = r.i64();
        st.last_label = r.u64();
        const auto counts = r.u64();
        if (counts > r.remaining() / 8) throw SnapshotError("snapshot truncated");
        st.training_counts.resize(counts);
        for (auto& c : st.training_counts) c = r.u64();
        const auto hists = r.u64();
        if (hists > r.remaining() / 24) throw SnapshotError("snapshot truncated");
        st.histograms.reserve(hists);
        for (std::uint64_t l = 0; l < hists; ++l) {
            ForgettingHistogram::RawState raw;
            raw.update_count = r.u64();
            raw.raw_sum = r.f64();
            raw.scale = r.f64();
            raw.weights = r.f64s(detail::kMaxSnapshotArray);
            raw.tree = r.f64s(detail::kMaxSnapshotArray);
            st.histograms.push_back(ForgettingHistogram::from_raw_state(st.domain, std::move(raw)));
        }
    }
    if (r.remaining() != 0) throw SnapshotError("unexpected trailing payload bytes");
    try {
        return Estimator(std::move(st));
    } catch (const SnapshotError&) {
        throw;
    } catch (const Error& e) {
        throw SnapshotError(std::string("inconsistent snapshot: ") + e.what());
    }
}

/// Writes via a temporary file and rename so a crash never leaves a partial snapshot.
inline void save_snapshot(const Estimator& est, const std::filesystem::path& path) {
    const auto bytes = serialize_snapshot(est);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw SnapshotError("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw SnapshotError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw SnapshotError("cannot move snapshot into place at " + path.string() + ": " + ec.message());
}

inline Estimator load_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SnapshotError("cannot open snapshot " + path.string());
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_snapshot(bytes);
}

}  // namespace prosumpi
