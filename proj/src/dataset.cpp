#include "turbotwin/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "turbotwin/rng.hpp"

namespace twin {

bool RunDataset::has_channel(const std::string& name) const {
    return std::find(channel_names.begin(), channel_names.end(), name) != channel_names.end();
}

Index RunDataset::channel_index(const std::string& name) const {
    auto it = std::find(channel_names.begin(), channel_names.end(), name);
    if (it == channel_names.end())
        throw DataError("run '" + run_id + "' has no channel '" + name + "'");
    return static_cast<Index>(it - channel_names.begin());
}

Eigen::Ref<const Eigen::RowVectorXd> RunDataset::channel(const std::string& name) const {
    return data.row(channel_index(name));
}

std::vector<std::pair<Index, Index>> RunDataset::segments() const {
    std::vector<std::pair<Index, Index>> out;
    Index begin = 0;
    for (Index j : junctions) {
        out.emplace_back(begin, j);
        begin = j;
    }
    out.emplace_back(begin, length());
    return out;
}

const NormalizationSpec::Range& NormalizationSpec::range_of(const std::string& name) const {
    auto it = ranges.find(name);
    if (it == ranges.end())
        throw DataError("normalization spec does not cover channel '" + name + "'");
    return it->second;
}

NormalizationSpec NormalizationSpec::restricted_to(const std::vector<std::string>& names) const {
    NormalizationSpec out;
    for (const std::string& name : names) out.ranges[name] = range_of(name);
    return out;
}

std::vector<Slice> SliceSpec::with_label(SliceLabel label) const {
    std::vector<Slice> out;
    for (const Slice& s : slices)
        if (s.label == label) out.push_back(s);
    return out;
}

void SliceSpec::validate(Index length) const {
    Index prev_end = 0;
    for (std::size_t i = 0; i < slices.size(); ++i) {
        const Slice& s = slices[i];
        if (s.begin < prev_end || s.end <= s.begin || s.end > length)
            throw ConfigError("slice #" + std::to_string(i) + " [" + std::to_string(s.begin)
                              + ", " + std::to_string(s.end)
                              + ") is out of order, empty or out of range");
        prev_end = s.end;
    }
}

SliceSpec SliceSpec::flipped() const {
    SliceSpec out = *this;
    for (Slice& s : out.slices)
        s.label = s.label == SliceLabel::train ? SliceLabel::test : SliceLabel::train;
    return out;
}

RunDataset align(const std::vector<Channel>& channels, double target_rate) {
    if (channels.empty()) throw DataError("align: no channels");
    if (!(target_rate > 0.0)) throw ConfigError("align: target rate must be > 0");

    std::vector<Index> factors(channels.size());
    Index common_length = std::numeric_limits<Index>::max();
    for (std::size_t i = 0; i < channels.size(); ++i) {
        const Channel& ch = channels[i];
        if (ch.samples.empty()) throw DataError("channel '" + ch.name + "' is empty");
        const double ratio = ch.rate / target_rate;
        const double rounded = std::round(ratio);
        if (ratio < 1.0 - 1e-9)
            throw DataError("channel '" + ch.name + "' at " + std::to_string(ch.rate)
                            + " S/s is below the target rate; upsampling is not supported");
        if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-6 * ratio)
            throw DataError("target rate does not divide channel '" + ch.name + "' rate ("
                            + std::to_string(ch.rate) + " / " + std::to_string(target_rate)
                            + " is not an integer)");
        factors[i] = static_cast<Index>(rounded);
        common_length =
            std::min(common_length, static_cast<Index>(ch.samples.size()) / factors[i]);
    }
    if (common_length < 1)
        throw DataError("no complete sample window at the target rate; shortest channel is "
                        "shorter than its decimation factor");

    RunDataset ds;
    ds.rate = target_rate;
    ds.start_time = channels.front().start_time;
    ds.data.resize(static_cast<Index>(channels.size()), common_length);
    for (std::size_t i = 0; i < channels.size(); ++i) {
        const Channel& ch = channels[i];
        if (std::abs(ch.start_time - ds.start_time) > 0.5 / ch.rate)
            throw DataError("channel '" + ch.name + "' starts at a different time; "
                            "offset channels are not supported");
        if (ds.has_channel(ch.name)) throw DataError("duplicate channel '" + ch.name + "'");
        ds.channel_names.push_back(ch.name);
        if (!ch.unit.empty()) ds.units[ch.name] = ch.unit;
        const Index f = factors[i];
        // Block mean over non-overlapping windows of f native samples.
        Eigen::Map<const Matd> blocks(ch.samples.data(), f, common_length);
        ds.data.row(static_cast<Index>(i)) = blocks.colwise().mean();
    }
    if (!ds.data.allFinite()) throw DataError("aligned data contains non-finite values");
    return ds;
}

RunDataset align(const RawRun& run, double target_rate) {
    RunDataset ds = align(run.channels, target_rate);
    ds.run_id = run.run_id;
    ds.meta = run.meta;
    return ds;
}

NormalizationSpec fit_normalization(const RunDataset& ds,
                                    const std::vector<std::string>& channels) {
    NormalizationSpec spec;
    for (const std::string& name : channels) {
        const auto row = ds.channel(name);
        const double lo = row.minCoeff();
        const double hi = row.maxCoeff();
        if (!(hi > lo))
            throw DataError("channel '" + name + "' has degenerate range [" + std::to_string(lo)
                            + ", " + std::to_string(hi) + "]; cannot normalize");
        spec.ranges[name] = {lo, hi};
    }
    return spec;
}

RunDataset apply_normalization(const RunDataset& ds, const NormalizationSpec& spec) {
    std::vector<std::string> channels;
    channels.reserve(spec.ranges.size());
    for (const auto& [name, range] : spec.ranges) channels.push_back(name);
    return apply_normalization(ds, spec, channels);
}

RunDataset apply_normalization(const RunDataset& ds, const NormalizationSpec& spec,
                               const std::vector<std::string>& channels) {
    RunDataset out = ds;
    for (const std::string& name : channels) {
        const auto& range = spec.range_of(name); // spec-mismatch check
        out.data.row(out.channel_index(name)) =
            (ds.channel(name).array() - range.min) / (range.max - range.min);
    }
    return out;
}

Vecd denormalize(const NormalizationSpec& spec, const std::string& channel,
                 ConstRefVec<double> values) {
    const auto& range = spec.range_of(channel);
    return values.array() * (range.max - range.min) + range.min;
}

SliceSpec make_slices(Index length, int n_slices, SlicePattern pattern, SliceLabel first_label,
                      std::uint64_t seed) {
    if (n_slices < 2) throw ConfigError("need at least 2 slices");
    if (static_cast<Index>(n_slices) > length)
        throw ConfigError("cannot cut " + std::to_string(length) + " samples into "
                          + std::to_string(n_slices) + " slices");

    std::vector<SliceLabel> labels(static_cast<std::size_t>(n_slices));
    const SliceLabel other =
        first_label == SliceLabel::train ? SliceLabel::test : SliceLabel::train;
    if (pattern == SlicePattern::alternating) {
        for (int i = 0; i < n_slices; ++i) labels[i] = i % 2 == 0 ? first_label : other;
    } else {
        // Exactly ceil(n/2) train labels, placed by seeded shuffle.
        const int n_train = (n_slices + 1) / 2;
        for (int i = 0; i < n_slices; ++i)
            labels[i] = i < n_train ? SliceLabel::train : SliceLabel::test;
        Rng rng(seed);
        shuffle(labels, rng);
    }

    SliceSpec spec;
    for (int i = 0; i < n_slices; ++i) {
        const Index begin = length * i / n_slices;
        const Index end = length * (i + 1) / n_slices;
        spec.slices.push_back({begin, end, labels[static_cast<std::size_t>(i)]});
    }
    return spec;
}

RunDataset merge_runs(const std::vector<RunPart>& parts) {
    if (parts.empty()) throw DataError("merge: no parts");
    for (const RunPart& p : parts) {
        if (p.run == nullptr) throw DataError("merge: null part");
        if (p.begin < 0 || p.end <= p.begin || p.end > p.run->length())
            throw DataError("merge: range [" + std::to_string(p.begin) + ", "
                            + std::to_string(p.end) + ") out of bounds for run '"
                            + p.run->run_id + "'");
    }

    const RunDataset& first = *parts.front().run;
    const std::set<std::string> names(first.channel_names.begin(), first.channel_names.end());
    Index total = 0;
    for (const RunPart& p : parts) {
        if (p.run->rate != first.rate)
            throw DataError("merge: run '" + p.run->run_id + "' has rate "
                            + std::to_string(p.run->rate) + ", expected "
                            + std::to_string(first.rate));
        const std::set<std::string> other(p.run->channel_names.begin(),
                                          p.run->channel_names.end());
        if (other != names)
            throw DataError("merge: run '" + p.run->run_id + "' has a different channel set");
        total += p.end - p.begin;
    }

    RunDataset out;
    out.rate = first.rate;
    out.start_time = first.start_time;
    out.channel_names = first.channel_names;
    out.units = first.units;
    out.meta = first.meta;
    out.data.resize(first.n_channels(), total);

    std::string id;
    Index offset = 0;
    for (const RunPart& p : parts) {
        if (offset > 0) out.junctions.push_back(offset);
        // Preserve junctions internal to the selected range.
        for (Index j : p.run->junctions)
            if (j > p.begin && j < p.end) out.junctions.push_back(offset + (j - p.begin));
        for (Index c = 0; c < out.n_channels(); ++c) {
            const Index src = p.run->channel_index(out.channel_names[static_cast<std::size_t>(c)]);
            out.data.row(c).segment(offset, p.end - p.begin) =
                p.run->data.row(src).segment(p.begin, p.end - p.begin);
        }
        if (!id.empty()) id += "+";
        id += p.run->run_id + "[" + std::to_string(p.begin) + ":" + std::to_string(p.end) + ")";
        offset += p.end - p.begin;
    }
    std::sort(out.junctions.begin(), out.junctions.end());
    const bool whole_single_run =
        parts.size() == 1 && parts[0].begin == 0 && parts[0].end == first.length();
    out.run_id = whole_single_run ? first.run_id : id;
    return out;
}

} // namespace twin
