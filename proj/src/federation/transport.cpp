// Copyright 2026 The fedproto Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include <bit>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "fedproto/federation.hpp"

namespace fedproto::federation {
namespace {

constexpr std::uint8_t kMagic[4] = {'F', 'P', 'M', '1'};
constexpr std::size_t kHeaderBytes = 4 + 1 + 8 + 8;

static_assert(std::endian::native == std::endian::little,
              "payload encoding assumes a little-endian host");

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{in[at + static_cast<std::size_t>(i)]} << (8 * i);
  return v;
}

std::uint8_t kind_byte(PayloadKind kind) { return kind == PayloadKind::kPrototypeUpload ? 1 : 2; }

}  // namespace

std::string to_string(Direction direction) { return direction == Direction::kUp ? "up" : "down"; }

std::string to_string(PayloadKind kind) {
  return kind == PayloadKind::kPrototypeUpload ? "prototype_upload" : "item_matrix_broadcast";
}

std::vector<std::uint8_t> encode_matrix(PayloadKind kind, const Matrix& matrix) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  out.push_back(kind_byte(kind));
  put_u64(out, static_cast<std::uint64_t>(matrix.rows()));
  put_u64(out, static_cast<std::uint64_t>(matrix.cols()));
  const std::size_t body = static_cast<std::size_t>(matrix.size()) * sizeof(double);
  out.resize(kHeaderBytes + body);
  if (body > 0) std::memcpy(out.data() + kHeaderBytes, matrix.data(), body);
  return out;
}

Matrix decode_matrix(std::span<const std::uint8_t> bytes, PayloadKind expected) {
  if (bytes.size() < kHeaderBytes) throw DataError("payload shorter than its header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw DataError("payload has bad magic");
  if (bytes[4] != kind_byte(expected)) {
    throw DataError("payload kind is not " + to_string(expected));
  }
  const std::uint64_t rows = get_u64(bytes, 5);
  const std::uint64_t cols = get_u64(bytes, 13);
  if (cols != 0 && rows > (bytes.size() - kHeaderBytes) / sizeof(double) / cols) {
    throw DataError("payload truncated");
  }
  if (bytes.size() != kHeaderBytes + rows * cols * sizeof(double)) {
    throw DataError("payload length does not match its shape");
  }
  Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  if (rows * cols > 0) {
    std::memcpy(out.data(), bytes.data() + kHeaderBytes, rows * cols * sizeof(double));
  }
  return out;
}

void RoundLog::record(const Message& message) {
  MessageRecord rec;
  rec.direction = message.direction;
  rec.entity_id = message.entity_id;
  rec.kind = message.kind;
  rec.byte_count = message.payload.size();
  if (message.payload.size() >= kHeaderBytes) {
    rec.rows = static_cast<std::size_t>(get_u64(message.payload, 5));
    rec.cols = static_cast<std::size_t>(get_u64(message.payload, 13));
  }
  records_.push_back(std::move(rec));
}

void RoundLog::verify(const std::map<std::string, std::size_t>& k_per_entity,
                      std::size_t n_items, std::size_t rank) const {
  auto fail = [](const std::string& what) { throw ProtocolError("round log: " + what); };
  if (records_.size() != 2 * k_per_entity.size()) {
    fail(std::to_string(records_.size()) + " messages for " +
         std::to_string(k_per_entity.size()) + " entities");
  }
  std::set<std::string> uploaded;
  std::set<std::string> broadcast;
  for (const MessageRecord& rec : records_) {
    auto k = k_per_entity.find(rec.entity_id);
    if (k == k_per_entity.end()) fail("message for unknown entity '" + rec.entity_id + "'");
    if (rec.byte_count != kHeaderBytes + rec.rows * rec.cols * sizeof(double)) {
      fail("byte count of a message to '" + rec.entity_id + "' does not match its shape");
    }
    if (rec.direction == Direction::kUp) {
      if (rec.kind != PayloadKind::kPrototypeUpload) fail("upstream message is not an upload");
      if (!broadcast.empty()) fail("upload from '" + rec.entity_id + "' after a broadcast");
      if (!uploaded.insert(rec.entity_id).second) fail("second upload from '" + rec.entity_id + "'");
      if (rec.rows != k->second || rec.cols != n_items) {
        fail("upload from '" + rec.entity_id + "' is " + std::to_string(rec.rows) + " x " +
             std::to_string(rec.cols) + ", expected " + std::to_string(k->second) + " x " +
             std::to_string(n_items));
      }
    } else {
      if (rec.kind != PayloadKind::kItemMatrixBroadcast) fail("downstream message is not a broadcast");
      if (!uploaded.count(rec.entity_id)) fail("broadcast to '" + rec.entity_id + "' before its upload");
      if (!broadcast.insert(rec.entity_id).second) fail("second broadcast to '" + rec.entity_id + "'");
      if (rec.rows != n_items || rec.cols != rank) fail("broadcast has the wrong shape");
    }
  }
}

std::string RoundLog::export_lines() const {
  std::ostringstream out;
  for (const MessageRecord& rec : records_) {
    out << to_string(rec.direction) << ',' << rec.entity_id << ',' << to_string(rec.kind) << ','
        << rec.byte_count << '\n';
  }
  return out.str();
}

void RoundLog::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << export_lines();
  if (!out) throw DataError("write failed: " + path.string());
}

void Transport::send(Message message) {
  log_.record(message);
  queues_[{message.entity_id, message.direction}].push_back(std::move(message));
}

Message Transport::receive(const std::string& entity_id, Direction direction) {
  auto it = queues_.find({entity_id, direction});
  if (it == queues_.end() || it->second.empty()) {
    throw ProtocolError("no " + to_string(direction) + " message pending for '" + entity_id + "'");
  }
  Message message = std::move(it->second.front());
  it->second.pop_front();
  return message;
}

}  // namespace fedproto::federation
