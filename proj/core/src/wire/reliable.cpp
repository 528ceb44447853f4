#include "physlink/wire/reliable.hpp"

#include <algorithm>
#include <utility>

namespace physlink::wire {

std::vector<std::uint8_t> encode_envelope(const Envelope& e) {
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(e.channel));
    w.u32(e.seq);
    w.raw(e.payload);
    return std::move(w).take();
}

Envelope decode_envelope(std::span<const std::uint8_t> datagram) {
    ByteReader r(datagram);
    Envelope e;
    const std::uint8_t ch = r.u8();
    if (ch > 2) throw WireError("unknown channel");
    e.channel = static_cast<Channel>(ch);
    e.seq = r.u32();
    e.payload.assign(datagram.begin() + kEnvelopeOverhead, datagram.end());
    return e;
}

void Connection::send_unreliable(std::vector<std::uint8_t> payload) {
    if (dead_) return;
    Envelope e{Channel::Unreliable, next_unreliable_seq_++, std::move(payload)};
    auto dg = encode_envelope(e);
    bytes_sent_ += dg.size();
    outbox_.push_back(std::move(dg));
}

void Connection::send_reliable(std::vector<std::uint8_t> payload, double now) {
    if (dead_) return;
    pending_.push_back(std::move(payload));
    fill_window(now);
}

void Connection::fill_window(double now) {
    while (!pending_.empty() && in_flight_.size() < cfg_.max_in_flight) {
        const std::uint32_t seq = next_reliable_seq_++;
        InFlight f;
        f.payload = std::move(pending_.front());
        pending_.pop_front();
        f.rto = cfg_.rto_initial;
        auto [it, inserted] = in_flight_.emplace(seq, std::move(f));
        transmit(seq, it->second, now);
    }
}

void Connection::transmit(std::uint32_t seq, InFlight& f, double now) {
    Envelope e{Channel::Reliable, seq, f.payload};
    auto dg = encode_envelope(e);
    bytes_sent_ += dg.size();
    outbox_.push_back(std::move(dg));
    f.sent_once = true;
    f.attempts += 1;
    f.next_resend = now + f.rto;
    f.rto = std::min(f.rto * 2.0, cfg_.rto_max);
}

void Connection::update(double now) {
    if (dead_) return;
    for (auto& [seq, f] : in_flight_) {
        if (f.sent_once && now >= f.next_resend) {
            if (f.attempts >= cfg_.max_attempts) {
                dead_ = true;
                return;
            }
            transmit(seq, f, now);
        }
    }
    fill_window(now);
}

void Connection::on_datagram(std::span<const std::uint8_t> datagram, double now) {
    if (dead_) return;
    Envelope e = decode_envelope(datagram);
    bytes_received_ += datagram.size();
    switch (e.channel) {
    case Channel::Unreliable:
        delivered_.push_back(std::move(e.payload));
        break;
    case Channel::Reliable: {
        // Ack every copy; the first ack may have been lost.
        Envelope ack{Channel::Ack, e.seq, {}};
        auto dg = encode_envelope(ack);
        bytes_sent_ += dg.size();
        outbox_.push_back(std::move(dg));
        if (e.seq < expected_seq_ || stash_.count(e.seq)) break; // duplicate
        stash_.emplace(e.seq, std::move(e.payload));
        while (true) {
            auto it = stash_.find(expected_seq_);
            if (it == stash_.end()) break;
            delivered_.push_back(std::move(it->second));
            stash_.erase(it);
            ++expected_seq_;
        }
        break;
    }
    case Channel::Ack:
        in_flight_.erase(e.seq);
        fill_window(now);
        break;
    }
}

std::vector<std::vector<std::uint8_t>> Connection::out() {
    return std::exchange(outbox_, {});
}

std::vector<std::vector<std::uint8_t>> Connection::poll() {
    return std::exchange(delivered_, {});
}

} // namespace physlink::wire
