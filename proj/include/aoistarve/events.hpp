#pragma once

#include <cstdint>

#include "aoistarve/params.hpp"

namespace aoistarve {

enum class RxOutcome { Ok, Collision, PhyLoss, OutOfRange };

const char* to_string(RxOutcome o);

struct TxEvent {
  std::uint32_t tx_id = 0;
  double gen_time_ms = 0.0;
  double tx_time_ms = 0.0;
  Csr csr;
};

struct RxEvent {
  std::uint32_t tx_id = 0;
  std::uint32_t rx_id = 0;
  double gen_time_ms = 0.0;
  double rx_time_ms = 0.0;
  RxOutcome outcome = RxOutcome::Ok;
};

// In-process consumer of the simulator's event stream.
class EventSink {
public:
  virtual ~EventSink() = default;
  virtual void on_tx(const TxEvent&) {}
  virtual void on_rx(const RxEvent&) {}
  // Called once per subframe after reception resolution; free_fraction is
  // the fraction of selectable CSRs currently unreserved.
  virtual void on_subframe_end(std::int64_t /*t_ms*/, double /*free_fraction*/) {}
};

}  // namespace aoistarve
