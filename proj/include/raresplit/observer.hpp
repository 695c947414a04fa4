#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "raresplit/formula.hpp"
#include "raresplit/model.hpp"

namespace raresplit {

enum class Tri : std::uint8_t { Undecided, True, False };

std::string_view to_string(Tri t);

enum class NodeKind : std::uint8_t { Atom, Conj, Disj, Impl, InnerX, InnerF, InnerG, OuterX, OuterF, OuterG, Until };

std::string_view to_string(NodeKind k);

/// Guarded-command IR shared by all observer tables.
namespace obs_ir {

/// Slots a table can read or write. Self slots index the node's own state
/// (o, d, then up to four counters); input slots read the children.
enum class Ref : std::uint8_t { O, D, C0, C1, C2, C3, O1, D1, O2, D2 };

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
  enum class Op : std::uint8_t { Lit, Ref, Not, And, Or, Add, Lt, Le, Eq } op = Op::Lit;
  std::int64_t value = 0;
  Ref ref = Ref::O;
  std::vector<TermPtr> args;
};

struct Update {
  Ref target;
  TermPtr value;
};

struct Command {
  int id = 0;  // command number in the base table, kept through transforms
  TermPtr guard;
  std::vector<Update> updates;
  bool settle = false;  // guard read after the other commands' updates of the same step
};

using Table = std::vector<Command>;

std::string print_table(const Table& t);

std::int64_t eval(const Term& t, const std::int64_t* self, const std::int64_t* inputs);

// Mechanical edits used to derive every variant from the base tables.
Table swap_output(Table t);                       // o <- v becomes o <- !v
Table negate_input(Table t, Ref input);           // every read of input becomes its negation
Table strengthen_undecided(Table t);              // conjoin !d to every guard
Table drop_commands(Table t, std::vector<int> ids);
Table erase_counter(Table t, Ref counter);        // drop comparisons on and updates of a counter
Table erase_nonnegative_checks(Table t);          // drop `w' >= 0` and `w'' >= 0` (until without delay)

Table conjunction_table();
Table disjunction_table();
Table implication_table();
Table inner_x_table(std::int64_t k);
Table inner_f_table(std::int64_t k);
Table inner_g_table(std::int64_t k);
Table outer_x_table(std::int64_t k);
Table outer_f_table(std::int64_t k);
Table outer_g_table(std::int64_t k);
Table until_table(std::int64_t k, std::int64_t delay);

}  // namespace obs_ir

struct ObserverNode {
  NodeKind kind = NodeKind::Atom;
  std::uint64_t bound = 0;
  std::uint64_t delay = 0;  // leading X steps fused into an until node
  bool negated = false;     // output inverted by an enclosing negation
  bool latched = false;     // atom at the top level: evaluated on the first state only
  int input1 = -1;          // o', d'
  int input2 = -1;          // o'', d''
  std::vector<int> children;  // formula argument order, used for score paths
  ExprPtr atom;
  obs_ir::Table table;
  int counters = 0;
  std::size_t offset = 0;  // position of o in the network state vector
};

/// Compiled observer network for one restricted formula. Immutable and shareable.
class ObserverProgram {
 public:
  const std::vector<ObserverNode>& nodes() const { return nodes_; }
  int root() const { return root_; }
  std::size_t state_size() const { return state_size_; }
  std::size_t snapshot_bytes() const;
  std::size_t counter_count() const;

  /// Resolves `obs.root.0.w` style paths to a slot of the state vector.
  std::optional<int> slot(const std::string& path) const;
  /// Human-readable list of nodes, their paths and fields.
  std::string describe() const;

  std::vector<std::int64_t> initial_state() const;

 private:
  friend std::shared_ptr<const ObserverProgram> compile_observers(const Formula& f);
  std::vector<ObserverNode> nodes_;
  int root_ = -1;
  std::size_t state_size_ = 0;
  std::vector<std::string> paths_;
};

using ObserverProgramPtr = std::shared_ptr<const ObserverProgram>;

class RestrictionError : public std::runtime_error {
 public:
  RestrictionError(const std::string& msg, RestrictionReport report) : std::runtime_error(msg), report_(std::move(report)) {}
  const RestrictionReport& report() const { return report_; }

 private:
  RestrictionReport report_;
};

/// Compiles a formula accepted by check_restriction into observers; throws RestrictionError otherwise.
ObserverProgramPtr compile_observers(const Formula& f);

/// Mutable observer state for one simulation.
class ObserverNetwork {
 public:
  ObserverNetwork() = default;
  explicit ObserverNetwork(ObserverProgramPtr program);

  const ObserverProgram& program() const { return *program_; }
  const ObserverProgramPtr& program_ptr() const { return program_; }

  void reset();
  /// Runs every node once, leaves first, on the given model state. Returns the root output.
  Tri observe(const ModelState& state);
  Tri verdict() const;

  Tri node_output(int node) const;

  const std::vector<std::int64_t>& values() const { return state_; }
  void restore(const std::vector<std::int64_t>& values);

  /// Little-endian layout: per node o (1 byte), d (1 byte), counters as i64.
  std::vector<std::uint8_t> snapshot() const;
  void restore(const std::vector<std::uint8_t>& bytes);

 private:
  void step_node(const ObserverNode& node, const ModelState& state);

  ObserverProgramPtr program_;
  std::vector<std::int64_t> state_;
};

/// Number of times the until command-exclusivity check ran; exposed for tests.
std::uint64_t until_exclusivity_checks();

}  // namespace raresplit
