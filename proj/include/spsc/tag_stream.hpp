#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace spsc {

using TimePs = std::int64_t;
using Channel = std::uint16_t;

constexpr double kPsPerSecond = 1e12;
constexpr double kPsPerNs = 1e3;

struct Tag {
  TimePs time_ps = 0;
  Channel channel = 0;

  friend bool operator==(const Tag&, const Tag&) = default;
};

/// Time-ordered detection events over an acquisition window of
/// duration_ps. Times never decrease.
class TagStream {
 public:
  TagStream() = default;

  /// Throws std::invalid_argument if tags are not time-ordered or the
  /// duration is negative.
  TagStream(std::vector<Tag> tags, TimePs duration_ps);

  /// Sorts by (time, channel) first.
  static TagStream from_unsorted(std::vector<Tag> tags, TimePs duration_ps);

  /// Single-channel stream from sorted timestamps.
  static TagStream from_times(std::span<const TimePs> times, Channel channel, TimePs duration_ps);

  const std::vector<Tag>& tags() const { return tags_; }
  std::size_t size() const { return tags_.size(); }
  bool empty() const { return tags_.empty(); }
  TimePs duration_ps() const { return duration_ps_; }
  double duration_s() const { return static_cast<double>(duration_ps_) / kPsPerSecond; }

  std::vector<TimePs> times() const;

  /// Tags of one channel, keeping the duration.
  TagStream channel(Channel c) const;

  friend bool operator==(const TagStream&, const TagStream&) = default;

 private:
  std::vector<Tag> tags_;
  TimePs duration_ps_ = 0;
};

/// Tags per second over the stream duration. Throws std::invalid_argument
/// for a non-positive duration.
double count_rate(const TagStream& s);

}  // namespace spsc
