#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "turbotwin/errors.hpp"
#include "turbotwin/types.hpp"

namespace twin {

/// One sensor stream at its native sampling rate, before alignment.
struct Channel {
    std::string name;
    std::string unit;
    double rate = 0.0;       // samples per second
    double start_time = 0.0; // seconds
    std::vector<double> samples;
};

/// A run as loaded from disk: native-rate channels plus run metadata.
/// align() turns this into a common-rate RunDataset.
struct RawRun {
    std::string run_id;
    std::vector<Channel> channels;
    std::map<std::string, std::string> meta;
};

/// Aligned, common-rate, multichannel time-series table. Channels live as
/// rows of a dense matrix in a fixed order. Immutable by convention: every
/// operation returns a fresh dataset.
struct RunDataset {
    std::string run_id;
    double rate = 0.0;       // common rate, samples per second
    double start_time = 0.0; // seconds
    std::vector<std::string> channel_names;
    std::map<std::string, std::string> units;
    Matd data; // channels x length
    std::map<std::string, std::string> meta;
    /// Indices where a new contiguous segment begins (never 0). Delay
    /// windows must not straddle these.
    std::vector<Index> junctions;

    Index length() const { return data.cols(); }
    Index n_channels() const { return data.rows(); }
    bool has_channel(const std::string& name) const;
    /// Throws DataError if the channel is absent.
    Index channel_index(const std::string& name) const;
    Eigen::Ref<const Eigen::RowVectorXd> channel(const std::string& name) const;
    double time_at(Index i) const { return start_time + static_cast<double>(i) / rate; }

    /// Contiguous [begin, end) segments delimited by the junction markers.
    std::vector<std::pair<Index, Index>> segments() const;
};

/// Per-channel (min, max) recorded when normalization is fitted.
struct NormalizationSpec {
    struct Range {
        double min = 0.0;
        double max = 0.0;
    };
    std::map<std::string, Range> ranges;

    bool covers(const std::string& name) const { return ranges.count(name) != 0; }
    /// Throws DataError if the channel is not covered.
    const Range& range_of(const std::string& name) const;
    /// Spec limited to the given channels; each must be covered.
    NormalizationSpec restricted_to(const std::vector<std::string>& names) const;
};

enum class SliceLabel { train, test };

struct Slice {
    Index begin = 0; // half-open [begin, end)
    Index end = 0;
    SliceLabel label = SliceLabel::train;
};

/// Ordered, disjoint temporal slices labelling stretches of a run for
/// training or testing.
struct SliceSpec {
    std::vector<Slice> slices;

    std::vector<Slice> with_label(SliceLabel label) const;
    /// Throws ConfigError unless slices are sorted, disjoint and inside
    /// [0, length).
    void validate(Index length) const;
    /// Same slices with train/test swapped.
    SliceSpec flipped() const;
};

enum class SlicePattern { alternating, random };

/// Block-averages every channel down to target_rate and truncates to the
/// common length. Channels already at target_rate pass through; channels
/// below it raise DataError (upsampling is not supported).
RunDataset align(const std::vector<Channel>& channels, double target_rate);
RunDataset align(const RawRun& run, double target_rate);

/// min/max per named channel over the whole dataset (callers pass the
/// training portion). Constant channels raise DataError.
NormalizationSpec fit_normalization(const RunDataset& ds,
                                    const std::vector<std::string>& channels);

/// Maps the named channels to (x - min) / (max - min); values outside the
/// fitted range pass through unclamped. Defaults to every channel in the
/// spec. Throws DataError when a touched channel is missing from the spec
/// or the dataset.
RunDataset apply_normalization(const RunDataset& ds, const NormalizationSpec& spec);
RunDataset apply_normalization(const RunDataset& ds, const NormalizationSpec& spec,
                               const std::vector<std::string>& channels);

/// Inverse map back to physical units for one channel.
Vecd denormalize(const NormalizationSpec& spec, const std::string& channel,
                 ConstRefVec<double> values);

/// Contiguous near-equal slices. Alternating labels start from first_label;
/// the random pattern assigns ceil(n/2) train labels by seeded shuffle.
SliceSpec make_slices(Index length, int n_slices, SlicePattern pattern,
                      SliceLabel first_label = SliceLabel::test, std::uint64_t seed = 0);

/// A part of a run selected for merging: dataset plus half-open index range.
struct RunPart {
    const RunDataset* run = nullptr;
    Index begin = 0;
    Index end = 0;
};

/// Concatenates the selected ranges, recording a junction at every seam so
/// downstream feature construction never builds delay windows across one.
RunDataset merge_runs(const std::vector<RunPart>& parts);

} // namespace twin
