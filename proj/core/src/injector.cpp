#include "cwfd/injector.hpp"

#include <charconv>
#include <numeric>
#include <stdexcept>

namespace cwfd {

TriggerPlan::TriggerPlan(std::vector<std::size_t> locations, std::vector<std::size_t> bursts)
    : locations_(std::move(locations)), bursts_(std::move(bursts)) {
  if (locations_.size() != bursts_.size()) {
    throw std::invalid_argument("TriggerPlan: locations and bursts differ in length");
  }
  for (std::size_t i = 1; i < locations_.size(); ++i) {
    if (locations_[i] <= locations_[i - 1]) {
      throw std::invalid_argument("TriggerPlan: locations must be strictly increasing");
    }
  }
  total_ = std::accumulate(bursts_.begin(), bursts_.end(), std::size_t{0});
}

std::string TriggerPlan::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(locations_[i]) + ':' + std::to_string(bursts_[i]);
  }
  return out;
}

TriggerPlan TriggerPlan::parse(std::string_view text) {
  std::vector<std::size_t> locs, bursts;
  auto read = [&](std::string_view tok, std::size_t& out) {
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    if (ec != std::errc{} || p != tok.data() + tok.size()) {
      throw std::invalid_argument("TriggerPlan: bad token '" + std::string(tok) + "'");
    }
  };
  while (!text.empty()) {
    const auto start = text.find_first_not_of(" \t\r\n");
    if (start == std::string_view::npos) break;
    text.remove_prefix(start);
    const auto end = text.find_first_of(" \t\r\n");
    const auto tok = text.substr(0, end);
    text = end == std::string_view::npos ? std::string_view{} : text.substr(end);
    const auto colon = tok.find(':');
    if (colon == std::string_view::npos) {
      throw std::invalid_argument("TriggerPlan: expected k:delta, got '" + std::string(tok) + "'");
    }
    std::size_t k = 0, d = 0;
    read(tok.substr(0, colon), k);
    read(tok.substr(colon + 1), d);
    locs.push_back(k);
    bursts.push_back(d);
  }
  return TriggerPlan(std::move(locs), std::move(bursts));
}

Trace inject(const Trace& x, const TriggerPlan& plan) {
  if (x.empty()) throw std::invalid_argument("cannot inject into empty trace");
  const auto& events = x.events();
  const std::size_t len = events.size();
  std::vector<PacketEvent> out;
  out.reserve(len + plan.total());

  std::size_t next = 0;  // next original event to copy
  for (std::size_t m = 0; m < plan.size(); ++m) {
    const std::size_t k = std::min(plan.locations()[m], len);
    for (; next < k; ++next) out.push_back(events[next]);
    const double ts = k < len ? events[k].timestamp : events[len - 1].timestamp;
    out.insert(out.end(), plan.bursts()[m], PacketEvent{ts, kIncoming});
  }
  for (; next < len; ++next) out.push_back(events[next]);
  return Trace(std::move(out));
}

std::vector<std::size_t> equal_split(std::size_t total, std::size_t m) {
  if (m == 0) throw std::invalid_argument("equal_split: burst count must be >= 1");
  std::vector<std::size_t> out(m, total / m);
  for (std::size_t i = 0; i < total % m; ++i) ++out[i];
  return out;
}

}  // namespace cwfd
