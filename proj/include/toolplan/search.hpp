#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "toolplan/policy.hpp"
#include "toolplan/rewards.hpp"
#include "toolplan/tool_registry.hpp"
#include "toolplan/trajectory_log.hpp"

namespace toolplan::search {

enum class RewardMode { Outcome, Shaped, LlmEval };

struct SearchConfig {
    double exploration_weight = 1.0;  // w in the UCT bonus
    int expansion_candidates = 3;     // k proposals per expansion
    int max_iterations = 50;
    int max_depth = 40;
    int max_subtask_depth = 6;
    RewardMode reward_mode = RewardMode::Shaped;
    bool masking = true;
    uint64_t seed = 0;
    // test hook: called on every expansion with the subtask and exposed tool names
    std::function<void(std::optional<StageId>, const std::vector<std::string>&)> on_expansion;
};

struct SearchNode {
    int id = 0;
    int parent = -1;         // trajectory parent: defines the scratchpad path
    int search_parent = -1;  // tree edge used by selection/backprop
    std::vector<int> children;
    double value = 0;  // V(s): running mean of backpropagated rewards
    int visits = 0;    // N(s)
    int depth = 0;
    int subtask_depth = 0;
    ActionProposal action;
    std::vector<Message> messages;  // delta introduced at this node
    NodeScratchpad pad;
    std::optional<ToolResult> result;
    bool terminal = false;
    bool is_solution = false;
    double eval_reward = 0;
    std::string feedback_text;
    std::optional<EvalResult> reflection;
    rewards::StageStatus stage_status;
    rewards::OutcomeStatus outcome_status;
    std::optional<StageId> fired_stage;
};

class SearchTree {
public:
    SearchNode& make_node(int parent) {
        auto node = std::make_unique<SearchNode>();
        node->id = static_cast<int>(nodes_.size());
        node->parent = parent;
        node->search_parent = parent;
        if (parent >= 0) {
            node->depth = nodes_[parent]->depth + 1;
            node->subtask_depth = nodes_[parent]->subtask_depth + 1;
            node->stage_status = nodes_[parent]->stage_status;
            node->outcome_status = nodes_[parent]->outcome_status;
            nodes_[parent]->children.push_back(node->id);
        }
        node->pad.owner_node = node->id;
        nodes_.push_back(std::move(node));
        return *nodes_.back();
    }

    SearchNode& at(int id) { return *nodes_[static_cast<size_t>(id)]; }
    const SearchNode& at(int id) const { return *nodes_[static_cast<size_t>(id)]; }
    size_t size() const { return nodes_.size(); }

    std::vector<int> chain(int id) const {  // root..id along trajectory parents
        std::vector<int> out;
        for (int v = id; v >= 0; v = at(v).parent) out.push_back(v);
        std::reverse(out.begin(), out.end());
        return out;
    }

    PathView path_view(int id) const {
        PathView out;
        for (int v : chain(id)) out.pads.push_back(&at(v).pad);
        return out;
    }

    std::vector<Message> path_messages(int id) const {
        std::vector<Message> out;
        for (int v : chain(id))
            for (const auto& m : at(v).messages) out.push_back(m);
        return out;
    }

    rewards::TrajectoryView trajectory(int id) const {
        rewards::TrajectoryView out;
        for (int v : chain(id)) {
            const SearchNode& n = at(v);
            rewards::StepInfo step;
            step.pad = &n.pad;
            step.call = n.action.call ? &*n.action.call : nullptr;
            step.result = n.result ? &*n.result : nullptr;
            out.push_back(step);
        }
        return out;
    }

private:
    std::vector<std::unique_ptr<SearchNode>> nodes_;
};

/// UCT child choice: any unvisited child first (earliest-created), otherwise
/// argmax of V(s) + w * sqrt(ln N(p) / N(s)) with earliest-created ties.
inline int uct_select(const SearchTree& tree, int parent_id, double w) {
    const SearchNode& p = tree.at(parent_id);
    if (p.children.empty()) throw value_error("uct_select on a node with no children");
    for (int c : p.children)
        if (tree.at(c).visits == 0) return c;
    int best = p.children.front();
    double best_score = -std::numeric_limits<double>::infinity();
    for (int c : p.children) {
        const SearchNode& s = tree.at(c);
        double score =
            s.value + w * std::sqrt(std::log(static_cast<double>(p.visits)) / s.visits);
        if (score > best_score + 1e-15) {
            best_score = score;
            best = c;
        }
    }
    return best;
}

inline double uct_score(double value, int parent_visits, int child_visits, double w) {
    return value + w * std::sqrt(std::log(static_cast<double>(parent_visits)) /
                                 static_cast<double>(child_visits));
}

/// Walks leaf to root along search edges: N += 1, then V folds in the reward
/// as a running mean.
inline void backpropagate(SearchTree& tree, int leaf_id, double reward) {
    for (int v = leaf_id; v >= 0; v = tree.at(v).search_parent) {
        SearchNode& n = tree.at(v);
        n.visits += 1;
        n.value = (n.value * (n.visits - 1) + reward) / n.visits;
    }
}

struct StageFiring {
    StageId stage;
    int node;
};

struct SolutionReport {
    bool solved = false;
    int best_node = -1;
    double best_value = 0;
    int iterations_used = 0;
    int first_solution_iteration = -1;  // 1-based; -1 when never solved
    std::vector<StageFiring> stage_firings;
    ordered_json log;
    Usage usage;
    std::optional<std::string> submission_file;
    std::string outcome_text;  // "Solved" or "No Solution Found"
    std::vector<size_t> subtask_solution_counts;  // hierarchical only
};

struct EngineEnv {
    const Registry* registry = nullptr;
    const CompetitionSpec* competition = nullptr;
    const nlohmann::json* model_grids = nullptr;
    Policy* policy = nullptr;
    LlmEvaluator* evaluator = nullptr;  // required for RewardMode::LlmEval
    Clock* clock = nullptr;
    std::string algorithm_name = "mcts";
};

namespace detail {

inline rewards::RewardContext reward_ctx(const EngineEnv& env) {
    return rewards::RewardContext{env.competition, env.registry};
}

inline TrialContext trial_ctx(const EngineEnv& env, const SearchConfig& cfg) {
    TrialContext ctx;
    ctx.seed = cfg.seed;
    ctx.competition = env.competition;
    ctx.model_grids = env.model_grids;
    return ctx;
}

inline TrajectoryContext proposal_ctx(const SearchTree& tree, int node_id,
                                      const std::vector<Message>& messages,
                                      const RegistryView& view,
                                      const std::string& subtask_prefix) {
    (void)tree;
    (void)node_id;
    TrajectoryContext ctx;
    ctx.messages = &messages;
    ctx.tool_schemas = view.export_schemas();
    ctx.subtask_prefix = subtask_prefix;
    return ctx;
}

}  // namespace detail

/// Creates up to k children under `node`: each proposal becomes a child whose
/// tool call (if any) executes into the child's scratchpad. Failed calls still
/// become children; the error observation is state the search can react to.
inline std::vector<int> expand(SearchTree& tree, int node_id, const EngineEnv& env,
                               const SearchConfig& cfg, const RegistryView& view,
                               std::optional<StageId> subtask = std::nullopt) {
    if (cfg.on_expansion) {
        std::vector<std::string> names;
        for (const auto* d : view.exposed()) names.push_back(d->name);
        cfg.on_expansion(subtask, names);
    }
    std::vector<Message> history = tree.path_messages(node_id);
    std::string prefix = subtask ? stage_prompt_prefix(*subtask) : "";
    TrajectoryContext ctx = detail::proposal_ctx(tree, node_id, history, view, prefix);
    std::vector<ActionProposal> proposals;
    try {
        proposals = env.policy->propose(ctx, cfg.expansion_candidates);
    } catch (const MalformedBackendReply&) {
        return {};  // an unusable reply ends this branch, not the search
    }

    std::vector<int> children;
    TrialContext trial = detail::trial_ctx(env, cfg);
    for (auto& proposal : proposals) {
        if (static_cast<int>(children.size()) >= cfg.expansion_candidates) break;
        SearchNode& child = tree.make_node(node_id);
        child.action = proposal;
        if (proposal.call) {
            Message ai = Message::ai(proposal.reasoning, {*proposal.call});
            child.messages.push_back(ai);
            PathView path = tree.path_view(node_id);
            ToolResult result = view.invoke(*proposal.call, path, child.pad, trial);
            child.messages.push_back(Message::tool(result.message, proposal.call->call_id));
            child.result = std::move(result);
        } else {
            child.messages.push_back(Message::ai(proposal.reasoning));
            child.terminal = true;  // explicit terminal answer
        }
        children.push_back(child.id);
    }
    return children;
}

/// Depth-0 evaluation of a freshly expanded node: the immediate reward under
/// the configured mode, with the per-level depth penalty applied. Reward
/// feedback (or the judge's reflection) is appended as a Human message.
inline double evaluate_node(SearchTree& tree, int node_id, const EngineEnv& env,
                            const SearchConfig& cfg, bool use_subtask_depth = false,
                            std::optional<StageId> subtask = std::nullopt) {
    SearchNode& node = tree.at(node_id);
    rewards::TrajectoryView traj = tree.trajectory(node_id);
    rewards::RewardContext rctx = detail::reward_ctx(env);

    double reward = 0;
    std::string feedback;
    bool call_failed = node.result && !node.result->ok;

    if (subtask) {
        rewards::StageCheck check = rewards::check_stage(*subtask, traj, rctx);
        reward = check.passed ? 1.0 : 0.0;
        if (check.passed) node.is_solution = true;
        feedback = check.feedback;
    } else {
        switch (cfg.reward_mode) {
            case RewardMode::Shaped: {
                rewards::RewardSignal r =
                    rewards::shaped_reward(node.stage_status, traj, rctx, node_id);
                reward = r.value;
                feedback = r.feedback;
                node.fired_stage = r.stage;
                break;
            }
            case RewardMode::Outcome: {
                rewards::RewardSignal r = rewards::outcome_reward(node.outcome_status, traj, rctx);
                reward = r.value;
                feedback = r.feedback;
                node.fired_stage = r.stage;
                break;
            }
            case RewardMode::LlmEval: {
                std::vector<Message> history = tree.path_messages(node_id);
                TrajectoryContext ctx;
                ctx.messages = &history;
                EvalResult eval = env.evaluator->evaluate(ctx);
                node.reflection = eval;
                reward = eval.score01;
                feedback = eval.reflection;
                break;
            }
        }
    }
    if (call_failed && cfg.reward_mode != RewardMode::LlmEval) {
        // a failed tool call gets the explicit message plus the tool docstring
        feedback = rewards::feedback::tool_failure(node.action.call->tool,
                                                   node.result->message, rctx);
    }
    if (!feedback.empty()) {
        node.feedback_text = feedback;
        node.messages.push_back(Message::human(feedback));
    }
    int depth = use_subtask_depth ? node.subtask_depth : node.depth;
    node.eval_reward = rewards::depth_adjust(reward, depth);
    return node.eval_reward;
}

namespace detail {

inline bool success_condition(SearchTree& tree, int node_id, const EngineEnv& env) {
    rewards::TrajectoryView traj = tree.trajectory(node_id);
    return rewards::submission_valid(traj, reward_ctx(env));
}

/// Most promising root-to-leaf path: greedy descent by child value.
inline int best_leaf(const SearchTree& tree, int root_id) {
    int node = root_id;
    while (!tree.at(node).children.empty()) {
        int best = tree.at(node).children.front();
        for (int c : tree.at(node).children)
            if (tree.at(c).value > tree.at(best).value) best = c;
        node = best;
    }
    return node;
}

inline Usage total_usage(const EngineEnv& env) {
    Usage u = env.policy ? env.policy->usage() : Usage{};
    if (env.evaluator) {
        u.total_tokens += env.evaluator->usage().total_tokens;
        u.total_cost += env.evaluator->usage().total_cost;
    }
    return u;
}

/// Log the root-to-node path in the tree-search record family.
inline ordered_json build_tree_log(const SearchTree& tree, int node_id, const EngineEnv& env,
                                   const SearchConfig& cfg) {
    logs::TrajectoryLog log(env.competition->name, env.algorithm_name, cfg.seed, env.clock);
    auto chain = tree.chain(node_id);
    int message_count = 0;
    for (int v : chain) {
        const SearchNode& n = tree.at(v);
        message_count += static_cast<int>(n.messages.size());
        if (n.action.call) {
            log.tool_selection(n.action.reasoning, {*n.action.call});
            if (n.result) log.tool_result(n.result->message, n.pad.debug_dump());
        } else if (!n.action.reasoning.empty()) {
            log.tool_selection(n.action.reasoning, {});
        }
        if (n.reflection) log.reflection(n.reflection->reflection, n.reflection->raw_score);
        else if (!n.feedback_text.empty()) log.reward_feedback(n.feedback_text);
    }
    log.execution_summary(total_usage(env), message_count);
    return log.to_json();
}

inline SolutionReport finish_report(SearchTree& tree, int best, bool solved,
                                    const EngineEnv& env, const SearchConfig& cfg,
                                    int iterations) {
    SolutionReport report;
    report.solved = solved;
    report.best_node = best;
    report.best_value = tree.at(best).value;
    report.iterations_used = iterations;
    report.outcome_text = solved ? "Solved" : "No Solution Found";
    for (int v : tree.chain(best)) {
        const SearchNode& n = tree.at(v);
        if (n.fired_stage) report.stage_firings.push_back({*n.fired_stage, v});
    }
    report.usage = total_usage(env);
    report.log = build_tree_log(tree, best, env, cfg);
    rewards::TrajectoryView traj = tree.trajectory(best);
    report.submission_file = rewards::submission_path(traj, reward_ctx(env));
    return report;
}

}  // namespace detail

inline int make_root(SearchTree& tree, const EngineEnv& env) {
    SearchNode& root = tree.make_node(-1);
    root.messages.push_back(Message::human(env.competition->prompt_template));
    return root.id;
}

/// ReAct: a linear think-act-observe loop (a degenerate single-path tree with
/// one growing scratchpad). Stops on a valid submission, a terminal answer
/// from the policy, or budget exhaustion.
inline SolutionReport react_run(const EngineEnv& env, const SearchConfig& cfg) {
    if (cfg.max_iterations < 1) throw value_error("budget must be at least 1");
    SearchTree tree;
    int root = make_root(tree, env);
    RegistryView view = env.registry->full_view();
    TrialContext trial = detail::trial_ctx(env, cfg);

    logs::TrajectoryLog log(env.competition->name, env.algorithm_name, cfg.seed, env.clock);
    int node = root;
    bool solved = false;
    int steps = 0;
    for (; steps < cfg.max_iterations; ++steps) {
        std::vector<Message> history = tree.path_messages(node);
        TrajectoryContext ctx = detail::proposal_ctx(tree, node, history, view, "");
        std::vector<ActionProposal> proposals = env.policy->propose(ctx, 1);
        if (proposals.empty()) break;
        ActionProposal action = proposals.front();
        if (!action.call) break;  // terminal answer

        SearchNode& child = tree.make_node(node);
        child.action = action;
        child.messages.push_back(Message::ai(action.reasoning, {*action.call}));
        log.tool_execution_initiation(*action.call);
        PathView path = tree.path_view(node);
        ToolResult result = view.invoke(*action.call, path, child.pad, trial);
        child.messages.push_back(Message::tool(result.message, action.call->call_id));
        log.tool_execution_completion(result.message, child.pad.debug_dump());
        child.result = std::move(result);
        node = child.id;

        if (detail::success_condition(tree, node, env)) {
            solved = true;
            ++steps;
            break;
        }
    }
    int message_count = static_cast<int>(tree.path_messages(node).size());
    log.execution_summary(detail::total_usage(env), message_count);

    SolutionReport report;
    report.solved = solved;
    report.best_node = node;
    report.best_value = solved ? 1.0 : 0.0;
    report.iterations_used = steps;
    report.first_solution_iteration = solved ? steps : -1;
    report.outcome_text = solved ? "Solved" : "No Solution Found";
    report.usage = detail::total_usage(env);
    report.log = log.to_json();
    report.submission_file =
        rewards::submission_path(tree.trajectory(node), detail::reward_ctx(env));
    return report;
}

/// MCTS core: UCT selection to a leaf, expansion, depth-0 evaluation of each
/// new child, backpropagation. Early stop on the first valid submission.
inline SolutionReport mcts_run(const EngineEnv& env, const SearchConfig& cfg) {
    if (cfg.max_iterations < 1) throw value_error("budget must be at least 1");
    SearchTree tree;
    int root = make_root(tree, env);
    RegistryView view = env.registry->full_view();

    bool solved = false;
    int solved_node = -1;
    int iteration = 0;
    int first_solution_iteration = -1;
    for (; iteration < cfg.max_iterations && !solved; ++iteration) {
        int node = root;
        while (!tree.at(node).children.empty() && !tree.at(node).terminal)
            node = uct_select(tree, node, cfg.exploration_weight);
        if (tree.at(node).terminal || tree.at(node).depth >= cfg.max_depth) {
            tree.at(node).terminal = true;
            backpropagate(tree, node, tree.at(node).eval_reward);
            continue;
        }
        std::vector<int> kids = expand(tree, node, env, cfg, view);
        if (kids.empty()) {
            tree.at(node).terminal = true;
            backpropagate(tree, node, tree.at(node).eval_reward);
            continue;
        }
        for (int kid : kids) {
            double r = evaluate_node(tree, kid, env, cfg);
            backpropagate(tree, kid, r);
            if (detail::success_condition(tree, kid, env)) {
                tree.at(kid).terminal = true;
                tree.at(kid).is_solution = true;
                solved = true;
                solved_node = kid;
                first_solution_iteration = iteration + 1;
                break;
            }
        }
    }
    int best = solved ? solved_node : detail::best_leaf(tree, root);
    SolutionReport report = detail::finish_report(tree, best, solved, env, cfg, iteration);
    report.first_solution_iteration = first_solution_iteration;
    return report;
}

/// Hierarchical MCTS: one subtask per workflow stage, in order. Each subtask
/// searches with its stage checker as the only reward (no shaping inside a
/// subtask), enumerating every solution node up to the subtask depth cap; all
/// solutions seed the next subtask's root. An empty solution set ends the run
/// with "No Solution Found".
inline SolutionReport hierarchical_run(const EngineEnv& env, const SearchConfig& cfg) {
    if (cfg.max_iterations < 1) throw value_error("budget must be at least 1");
    SearchTree tree;
    int root = make_root(tree, env);

    std::vector<int> carried = {root};
    std::vector<size_t> solution_counts;
    int iterations_total = 0;

    for (StageId stage : kAllStages) {
        RegistryView view =
            cfg.masking ? env.registry->masked_view(stage) : env.registry->full_view();

        // fresh virtual root whose children are the carried solutions
        SearchNode& vroot = tree.make_node(-1);
        vroot.terminal = false;
        for (int c : carried) {
            SearchNode& node = tree.at(c);
            node.search_parent = vroot.id;
            node.visits = 0;
            node.value = 0;
            node.eval_reward = 0;
            node.terminal = false;
            node.is_solution = false;
            node.subtask_depth = 0;
            vroot.children.push_back(c);
        }

        // carried nodes that already satisfy this stage are solutions at depth 0
        rewards::RewardContext rctx = detail::reward_ctx(env);
        for (int c : carried) {
            rewards::StageCheck check = rewards::check_stage(stage, tree.trajectory(c), rctx);
            if (check.passed) {
                tree.at(c).is_solution = true;
                tree.at(c).terminal = true;
                tree.at(c).eval_reward = 1.0;
            }
        }

        for (int iter = 0; iter < cfg.max_iterations; ++iter) {
            ++iterations_total;
            int node = vroot.id;
            while (!tree.at(node).children.empty() && !tree.at(node).terminal)
                node = uct_select(tree, node, cfg.exploration_weight);
            if (node == vroot.id) break;  // every branch exhausted
            SearchNode& leaf = tree.at(node);
            if (leaf.terminal || leaf.subtask_depth >= cfg.max_subtask_depth ||
                leaf.depth >= cfg.max_depth) {
                leaf.terminal = true;
                backpropagate(tree, node, leaf.eval_reward);
                continue;
            }
            std::vector<int> kids = expand(tree, node, env, cfg, view, stage);
            if (kids.empty()) {
                leaf.terminal = true;
                backpropagate(tree, node, leaf.eval_reward);
                continue;
            }
            for (int kid : kids) {
                double r = evaluate_node(tree, kid, env, cfg, /*use_subtask_depth=*/true, stage);
                if (tree.at(kid).is_solution) tree.at(kid).terminal = true;
                backpropagate(tree, kid, r);
            }
        }

        std::vector<int> solutions;
        auto collect = [&](auto&& self, int id) -> void {
            if (tree.at(id).is_solution) solutions.push_back(id);
            for (int c : tree.at(id).children) self(self, c);
        };
        collect(collect, vroot.id);
        solution_counts.push_back(solutions.size());

        if (solutions.empty()) {
            int best = detail::best_leaf(tree, vroot.id);
            if (best == vroot.id && !carried.empty()) best = carried.front();
            SolutionReport report =
                detail::finish_report(tree, best, false, env, cfg, iterations_total);
            report.subtask_solution_counts = solution_counts;
            return report;
        }
        carried = solutions;
    }

    // highest-value solution node at the final subtask
    int best = carried.front();
    for (int c : carried)
        if (tree.at(c).value > tree.at(best).value) best = c;
    SolutionReport report = detail::finish_report(tree, best, true, env, cfg, iterations_total);
    report.subtask_solution_counts = solution_counts;
    return report;
}

}  // namespace toolplan::search
