#include "ogb/icn/segment.hpp"

#include <charconv>

namespace ogb::icn {

Name
segment_name(const Name& base, std::uint32_t index)
{
  return base.appended("seg=" + std::to_string(index));
}

std::optional<std::uint32_t>
parse_segment(const std::string& component)
{
  if (component.size() <= 4 || component.compare(0, 4, "seg=") != 0)
    return std::nullopt;
  std::uint32_t v = 0;
  auto first = component.data() + 4;
  auto last = component.data() + component.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    return std::nullopt;
  return v;
}

std::vector<Data>
segment(const Name& base, ByteSpan payload, std::size_t max_payload, Millis freshness)
{
  if (max_payload == 0)
    throw std::invalid_argument("max_payload must be positive");
  std::size_t count = payload.empty() ? 1 : (payload.size() + max_payload - 1) / max_payload;
  std::vector<Data> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Data d;
    d.name = segment_name(base, static_cast<std::uint32_t>(i));
    auto begin = std::min(payload.size(), i * max_payload);
    auto end = std::min(payload.size(), begin + max_payload);
    d.payload.assign(payload.begin() + begin, payload.begin() + end);
    d.freshness = freshness;
    d.segment = static_cast<std::uint32_t>(i);
    d.final_segment = static_cast<std::uint32_t>(count - 1);
    out.push_back(std::move(d));
  }
  return out;
}

Bytes
reassemble(const std::vector<Data>& segments)
{
  if (segments.empty())
    throw FetchError("no segments");
  auto final_index = segments.front().final_segment;
  if (!final_index || *final_index + 1 != segments.size())
    throw FetchError("incomplete segment sequence");
  Bytes out;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (segments[i].segment != i)
      throw FetchError("segment " + std::to_string(i) + " out of order");
    out.insert(out.end(), segments[i].payload.begin(), segments[i].payload.end());
  }
  return out;
}

namespace {

struct FetchState : std::enable_shared_from_this<FetchState>
{
  std::weak_ptr<AppFace> face;
  Name base;
  FetchOptions options;
  std::function<void(FetchResult)> done;

  std::mutex mutex;
  std::vector<std::optional<Data>> segments;
  std::uint32_t next = 1;
  std::size_t in_flight = 0;
  std::size_t received = 0;
  bool finished = false;

  void
  request(std::uint32_t index)
  {
    auto f = face.lock();
    if (!f) {
      finish(false, "face closed");
      return;
    }
    Interest interest;
    interest.name = segment_name(base, index);
    interest.lifetime = options.lifetime;
    interest.nonce = random_nonce();
    if (options.decorate)
      options.decorate(interest);
    auto self = shared_from_this();
    f->express_async(
      std::move(interest), [self, index](const Data& d) { self->on_data(index, d); },
      [self, index] { self->finish(false, "timeout fetching " + segment_name(self->base, index).to_uri()); },
      options.retries);
  }

  void
  on_data(std::uint32_t index, const Data& d)
  {
    std::vector<std::uint32_t> to_request;
    bool complete = false;
    bool bad = false;
    {
      std::lock_guard lock(mutex);
      if (finished)
        return;
      if (index == 0)
        segments.assign(d.final_segment.value_or(0) + std::size_t{1}, std::nullopt);
      else
        --in_flight;
      if (index >= segments.size()) {
        finished = true;
        bad = true;
      }
      else {
        if (!segments[index]) {
          segments[index] = d;
          ++received;
        }
        while (next < segments.size() && in_flight < std::max<std::size_t>(options.window, 1)) {
          to_request.push_back(next++);
          ++in_flight;
        }
        complete = received == segments.size();
        finished = complete;
      }
    }
    if (bad) {
      done(FetchResult{false, {}, "segment index beyond final marker"});
      return;
    }
    for (auto i : to_request)
      request(i);
    if (complete) {
      FetchResult r;
      r.ok = true;
      for (auto& seg : segments)
        r.segments.push_back(std::move(*seg));
      done(std::move(r));
    }
  }

  void
  finish(bool ok, std::string error)
  {
    {
      std::lock_guard lock(mutex);
      if (finished)
        return;
      finished = true;
    }
    done(FetchResult{ok, {}, std::move(error)});
  }
};

} // namespace

void
fetch_async(AppFace& face, const Name& base, FetchOptions options,
            std::function<void(FetchResult)> done)
{
  auto state = std::make_shared<FetchState>();
  state->face = face.weak_from_this();
  state->base = base;
  state->options = std::move(options);
  state->done = std::move(done);
  state->request(0);
}

std::vector<Data>
get_segments(AppFace& face, const Name& base, GetOptions options)
{
  auto promise = std::make_shared<std::promise<FetchResult>>();
  auto future = promise->get_future();
  fetch_async(face, base, options.fetch, [promise](FetchResult r) { promise->set_value(std::move(r)); });
  auto result = future.get();
  if (!result.ok)
    throw FetchError(result.error);
  if (options.validate) {
    for (const auto& s : result.segments)
      if (!options.validate(s))
        throw FetchError("validation failed for " + s.name.to_uri());
  }
  return std::move(result.segments);
}

Bytes
get(AppFace& face, const Name& base, GetOptions options)
{
  return reassemble(get_segments(face, base, std::move(options)));
}

} // namespace ogb::icn
