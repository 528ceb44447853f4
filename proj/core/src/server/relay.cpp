#include "physlink/server/relay.hpp"

#include <cmath>

namespace physlink::server {

int RelayHost::add_connection(bool is_host) {
    const int id = next_conn_++;
    Conn c;
    c.is_host = is_host;
    conns_.emplace(id, std::move(c));
    return id;
}

void RelayHost::remove_connection(int conn) {
    conns_.erase(conn);
}

void RelayHost::on_datagram(int conn, std::span<const std::uint8_t> datagram, double now) {
    auto it = conns_.find(conn);
    if (it == conns_.end()) return;
    it->second.link.on_datagram(datagram, now);
    for (const auto& payload : it->second.link.poll()) {
        if (wire::peek_type(payload) != wire::MsgType::GroupedUpdate) continue;
        if (!it->second.is_host) {
            ++rejected_updates_;
            continue;
        }
        const auto msg = wire::decode_group(payload);
        for (const wire::TransformRecord& rec : msg.records) latest_[rec.entity_id] = rec;
    }
    flush(conn, it->second.link, now);
}

void RelayHost::fanout(double at) {
    std::vector<wire::TransformRecord> records;
    for (const auto& [id, rec] : latest_) {
        auto fw = last_forwarded_.find(id);
        wire::TransformRecord out = rec;
        if (fw == last_forwarded_.end()) {
            out.mask = wire::kMaskPosition | wire::kMaskRotation;
        } else {
            out.mask = wire::diff_transform(fw->second, {rec.position, rec.rotation}, cfg_.pos_eps, cfg_.rot_eps);
            if (out.mask == 0) continue;
        }
        records.push_back(out);
        Transform& prev = last_forwarded_[id];
        prev = wire::apply_record(prev, out);
    }
    if (records.empty()) return;

    ++fanout_seq_;
    const auto groups = wire::encode_group(records, fanout_seq_, cfg_.max_payload);
    for (auto& [cid, c] : conns_) {
        if (c.is_host) continue;
        for (const auto& g : groups) {
            c.link.send_unreliable(g);
            ++messages_out_;
        }
        flush(cid, c.link, at);
    }
}

void RelayHost::update(double now) {
    if (first_update_) {
        next_send_ = now + 1.0 / cfg_.send_rate;
        first_update_ = false;
    }
    while (now >= next_send_) {
        fanout(next_send_);
        next_send_ += 1.0 / cfg_.send_rate;
    }
    for (auto& [cid, c] : conns_) {
        c.link.update(now);
        flush(cid, c.link, now);
    }
}

void RelayHost::flush(int conn, wire::Connection& link, double at) {
    for (auto& dg : link.out()) {
        bytes_per_conn_[conn] += dg.size();
        send_log_.push_back({at, {conn, dg.size()}});
        send_(conn, std::move(dg));
    }
}

std::map<int, double> RelayHost::meter_report(double window, double now) const {
    std::map<int, double> out;
    for (const auto& [cid, c] : conns_) out[cid] = 0.0;
    for (const auto& [t, entry] : send_log_) {
        if (t > now || t <= now - window) continue;
        out[entry.first] += static_cast<double>(entry.second);
    }
    for (auto& [cid, b] : out) b = b / window / 1000.0;
    return out;
}

std::vector<RelayMeterRow> RelayHost::meter_rows() const {
    std::map<std::pair<std::uint32_t, int>, RelayMeterRow> buckets;
    for (const auto& [t, entry] : send_log_) {
        const auto second = static_cast<std::uint32_t>(std::floor(t));
        RelayMeterRow& row = buckets[{second, entry.first}];
        row.second = second;
        row.conn = entry.first;
        row.bytes_out += entry.second;
        row.msgs_out += 1;
    }
    std::vector<RelayMeterRow> rows;
    rows.reserve(buckets.size());
    for (const auto& [key, row] : buckets) rows.push_back(row);
    return rows;
}

std::uint64_t RelayHost::bytes_to(int conn) const {
    auto it = bytes_per_conn_.find(conn);
    return it == bytes_per_conn_.end() ? 0 : it->second;
}

} // namespace physlink::server
