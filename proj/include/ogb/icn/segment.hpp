#pragma once

#include "ogb/icn/app_face.hpp"

namespace ogb::icn {

inline constexpr std::size_t kDefaultMaxPayload = 8192;

class FetchError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// base/seg=N
Name
segment_name(const Name& base, std::uint32_t index);

/// Index of a "seg=N" component, if it is one.
std::optional<std::uint32_t>
parse_segment(const std::string& component);

/// Splits payload into ceil(len / max_payload) Data packets (at least one)
/// named base/seg=i; all carry the final-segment index.
std::vector<Data>
segment(const Name& base, ByteSpan payload, std::size_t max_payload = kDefaultMaxPayload,
        Millis freshness = Millis{0});

/// Concatenates payloads; segments must be complete and in order.
Bytes
reassemble(const std::vector<Data>& segments);

struct FetchOptions
{
  Millis lifetime{4000};
  int retries = 3;
  /// Maximum segment Interests in flight after segment 0.
  std::size_t window = 8;
  /// Applied to every Interest before sending (e.g. signing).
  std::function<void(Interest&)> decorate;
};

struct FetchResult
{
  bool ok = false;
  std::vector<Data> segments;
  std::string error;
};

/// Fetches segment 0, learns the final index and pipelines the rest.
/// done runs exactly once, on an arbitrary thread.
void
fetch_async(AppFace& face, const Name& base, FetchOptions options,
            std::function<void(FetchResult)> done);

struct GetOptions
{
  FetchOptions fetch;
  /// Returns false to reject a segment.
  std::function<bool(const Data&)> validate;
};

/// Blocking segmented GET; throws FetchError on timeout or validation
/// failure.
Bytes
get(AppFace& face, const Name& base, GetOptions options = {});

std::vector<Data>
get_segments(AppFace& face, const Name& base, GetOptions options = {});

} // namespace ogb::icn
