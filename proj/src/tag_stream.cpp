#include "spsc/tag_stream.hpp"

#include <algorithm>
#include <stdexcept>

namespace spsc {

TagStream::TagStream(std::vector<Tag> tags, TimePs duration_ps)
    : tags_(std::move(tags)), duration_ps_(duration_ps) {
  if (duration_ps_ < 0) throw std::invalid_argument("TagStream: negative duration");
  const auto unordered = std::adjacent_find(
      tags_.begin(), tags_.end(), [](const Tag& a, const Tag& b) { return b.time_ps < a.time_ps; });
  if (unordered != tags_.end()) {
    throw std::invalid_argument("TagStream: tags are not time-ordered");
  }
}

TagStream TagStream::from_unsorted(std::vector<Tag> tags, TimePs duration_ps) {
  std::sort(tags.begin(), tags.end(), [](const Tag& a, const Tag& b) {
    return a.time_ps != b.time_ps ? a.time_ps < b.time_ps : a.channel < b.channel;
  });
  return TagStream(std::move(tags), duration_ps);
}

TagStream TagStream::from_times(std::span<const TimePs> times, Channel channel, TimePs duration_ps) {
  std::vector<Tag> tags;
  tags.reserve(times.size());
  for (TimePs t : times) tags.push_back({t, channel});
  return TagStream(std::move(tags), duration_ps);
}

std::vector<TimePs> TagStream::times() const {
  std::vector<TimePs> out;
  out.reserve(tags_.size());
  for (const Tag& t : tags_) out.push_back(t.time_ps);
  return out;
}

TagStream TagStream::channel(Channel c) const {
  std::vector<Tag> out;
  std::copy_if(tags_.begin(), tags_.end(), std::back_inserter(out),
               [c](const Tag& t) { return t.channel == c; });
  return TagStream(std::move(out), duration_ps_);
}

double count_rate(const TagStream& s) {
  if (s.duration_ps() <= 0) throw std::invalid_argument("count_rate: duration must be positive");
  return static_cast<double>(s.size()) / s.duration_s();
}

}  // namespace spsc
