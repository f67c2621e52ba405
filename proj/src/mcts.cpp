#include "rex/mcts.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <string>

namespace rex {

int select_uct(const std::vector<double>& q, const std::vector<std::int64_t>& visits,
               std::int64_t total_visits, double c) {
    if (q.empty() || q.size() != visits.size())
        throw no_actions("select_uct: empty or mismatched action statistics");
    for (std::size_t i = 0; i < visits.size(); ++i)
        if (visits[i] == 0) return static_cast<int>(i);

    const double log_n = std::log(static_cast<double>(std::max<std::int64_t>(total_visits, 1)));
    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double score = q[i] + c * std::sqrt(log_n / static_cast<double>(visits[i]));
        if (score > best_score) {
            best_score = score;
            best = static_cast<int>(i);
        }
    }
    return best;
}

std::pair<double, std::int64_t> update_uct(double q, std::int64_t visits, double episode_return) {
    const std::int64_t n = visits + 1;
    return {q + (episode_return - q) / static_cast<double>(n), n};
}

double softmax_value(const std::vector<double>& q, double alpha) {
    if (q.empty()) throw no_actions("softmax_value: empty action values");
    const double m = *std::max_element(q.begin(), q.end());
    if (alpha <= 0.0) return m;
    double acc = 0.0;
    for (double v : q) acc += std::exp((v - m) / alpha);
    return m + alpha * std::log(acc);
}

std::vector<double> ments_policy(const std::vector<double>& q, double alpha, double lambda) {
    if (q.empty()) throw no_actions("ments_policy: empty action values");
    const std::size_t n = q.size();
    const double m = *std::max_element(q.begin(), q.end());
    double acc = 0.0;
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::exp((q[i] - m) / alpha);
        acc += out[i];
    }
    for (std::size_t i = 0; i < n; ++i)
        out[i] = (1.0 - lambda) * out[i] / acc + lambda / static_cast<double>(n);
    return out;
}

double soft_q_update(double mu, double discount, const std::vector<std::int64_t>& child_visits,
                     const std::vector<double>& child_values, std::int64_t edge_visits) {
    if (child_visits.size() != child_values.size())
        throw inconsistent_counts("soft_q_update: child visit/value arrays differ in length");
    std::int64_t total = 0;
    for (std::int64_t v : child_visits) total += v;
    if (total != edge_visits)
        throw inconsistent_counts("soft_q_update: child visits do not sum to the edge count");
    if (edge_visits == 0) return mu;
    double acc = 0.0;
    for (std::size_t i = 0; i < child_visits.size(); ++i)
        acc += static_cast<double>(child_visits[i]) / static_cast<double>(edge_visits) *
               child_values[i];
    return mu + discount * acc;
}

double clipped_leaf_value(double v, double lower, double upper) {
    if (lower > upper) throw inverted_bounds("clipped_leaf_value: lower bound exceeds upper");
    return std::clamp(v, lower, upper);
}

double rollout(const environment& env, const state& from, int depth, double discount,
               counter_rng& rng) {
    double total = 0.0;
    double disc = 1.0;
    state s = from;
    for (int d = 0; d < depth && !env.is_terminal(s); ++d) {
        const action_pair pair = env.extreme_pair(s);
        const action_vector& a = rng.below(2) == 0 ? pair.at_upper : pair.at_lower;
        total += disc * env.reward(s, a);
        disc *= discount;
        s = env.sample_next(s, a, rng);
    }
    return total;
}

namespace {

struct tree_node;

struct tree_edge {
    action_vector action;
    std::int64_t visits = 0;
    double q = 0.0;  // mean return (uct) or soft backup value (ments)
    double mu = 0.0; // running mean immediate reward
    bool enumerated = false;
    std::vector<double> child_probs;  // aligned with children when enumerated
    std::vector<std::unique_ptr<tree_node>> children;
};

struct tree_node {
    state s;
    bool terminal = false;
    bool expanded = false;
    std::int64_t visits = 0;
    double value = 0.0;  // leaf estimate after evaluation
    std::vector<tree_edge> edges;
};

void append_double(std::string& key, double x) {
    char buf[sizeof(double)];
    std::memcpy(buf, &x, sizeof(double));
    key.append(buf, sizeof(double));
}

std::string state_key(const state& s) {
    std::string key;
    key.reserve(24 + sizeof(double) * static_cast<std::size_t>(s.context.size() + s.capacity.size()));
    key.push_back(static_cast<char>(s.t & 0xff));
    key.push_back(static_cast<char>((s.t >> 8) & 0xff));
    key.push_back(static_cast<char>(s.tag & 0xff));
    append_double(key, s.consumed);
    for (Eigen::Index i = 0; i < s.context.size(); ++i) append_double(key, s.context[i]);
    key.push_back('|');
    for (Eigen::Index i = 0; i < s.capacity.size(); ++i) append_double(key, s.capacity[i]);
    return key;
}

struct search_ctx {
    const environment& env;
    const mcts_config& cfg;
    counter_rng bounds_seeder;
    std::map<std::string, value_interval> bounds_cache;
    std::uint64_t bounds_issued = 0;

    const value_interval& bounds_for(const state& s) {
        std::string key = state_key(s);
        auto it = bounds_cache.find(key);
        if (it != bounds_cache.end()) return it->second;
        const value_interval vi =
            value_bounds(env, s, cfg.bound_samples, bounds_seeder.split(bounds_issued++));
        return bounds_cache.emplace(std::move(key), vi).first->second;
    }

    // Sampling noise in the bracket endpoints can invert them; clip into the
    // ordered hull rather than fail.
    double clip_into(double v, const value_interval& b) const {
        return clipped_leaf_value(v, std::min(b.lower, b.upper), std::max(b.lower, b.upper));
    }

    void expand(tree_node& n) const {
        n.terminal = env.is_terminal(n.s);
        if (!n.terminal) {
            auto acts = env.actions(n.s);
            n.edges.reserve(acts.size());
            for (auto& a : acts) {
                tree_edge e;
                e.action = std::move(a);
                n.edges.push_back(std::move(e));
            }
        }
        n.expanded = true;
    }

    double node_value(const tree_node& n) const {
        if (n.terminal) return 0.0;
        std::vector<double> tried;
        for (const auto& e : n.edges)
            if (e.visits > 0) tried.push_back(e.q);
        if (tried.empty()) return n.value;
        return softmax_value(tried, cfg.temperature);
    }

    double leaf_estimate(tree_node& leaf, counter_rng& roll_rng, counter_rng& gate_rng) {
        double v = rollout(env, leaf.s, cfg.rollout_depth, cfg.discount, roll_rng);
        if (cfg.value_clipped &&
            (cfg.clip_probability >= 1.0 || gate_rng.uniform() < cfg.clip_probability)) {
            v = clip_into(v, bounds_for(leaf.s));
        }
        leaf.value = v;
        return v;
    }

    int pick_edge(const tree_node& n, counter_rng& sel_rng) const {
        if (n.edges.empty()) throw no_actions("search: decision node has no actions");
        for (std::size_t i = 0; i < n.edges.size(); ++i)
            if (n.edges[i].visits == 0) return static_cast<int>(i);

        if (cfg.variant == search_variant::uct) {
            std::vector<double> q(n.edges.size());
            std::vector<std::int64_t> visits(n.edges.size());
            for (std::size_t i = 0; i < n.edges.size(); ++i) {
                q[i] = n.edges[i].q;
                visits[i] = n.edges[i].visits;
            }
            return select_uct(q, visits, n.visits, cfg.exploration_c);
        }

        std::vector<double> q(n.edges.size());
        for (std::size_t i = 0; i < n.edges.size(); ++i) q[i] = n.edges[i].q;
        const double n_visits = static_cast<double>(n.visits);
        double lambda = std::min(
            1.0, cfg.exploration_eps * static_cast<double>(q.size()) / std::log(n_visits + 2.0));
        if (std::isfinite(cfg.ments_decay)) lambda *= 1.0 / (1.0 + n_visits / cfg.ments_decay);
        const std::vector<double> probs = ments_policy(q, cfg.temperature, lambda);
        return static_cast<int>(sel_rng.categorical(probs));
    }

    tree_node* child_after(tree_node& n, tree_edge& e, counter_rng& sel_rng) const {
        const auto succ = env.successors(n.s, e.action);
        if (succ) {
            if (!e.enumerated) {
                e.children.reserve(succ->size());
                e.child_probs.reserve(succ->size());
                for (const auto& ws : *succ) {
                    auto child = std::make_unique<tree_node>();
                    child->s = ws.next;
                    e.children.push_back(std::move(child));
                    e.child_probs.push_back(ws.prob);
                }
                e.enumerated = true;
            }
            return e.children[sel_rng.categorical(e.child_probs)].get();
        }
        auto child = std::make_unique<tree_node>();
        child->s = env.sample_next(n.s, e.action, sel_rng);
        e.children.push_back(std::move(child));
        return e.children.back().get();
    }
};

struct path_hop {
    tree_node* parent = nullptr;
    tree_edge* edge = nullptr;
    double r = 0.0;
};

}  // namespace

search_result search(const environment& env, const state& root_state,
                     const mcts_config& config) {
    if (config.iteration_budget <= 0)
        throw budget_violation("search: iteration budget must be positive");
    if (config.value_clipped && config.bound_samples <= 0)
        throw error("search: clipped search needs a positive bound sample count");

    search_ctx ctx{env, config, counter_rng(config.seed).split(0xB07D), {}, 0};

    search_result res;
    res.root_value_trace.reserve(static_cast<std::size_t>(config.iteration_budget));

    auto root = std::make_unique<tree_node>();
    root->s = root_state;
    ctx.expand(*root);
    if (config.value_clipped) res.root_bounds = ctx.bounds_for(root_state);

    if (root->terminal || root->edges.empty()) {
        res.root_value_trace.assign(static_cast<std::size_t>(config.iteration_budget), 0.0);
        return res;
    }

    const counter_rng base(config.seed);
    for (std::int64_t it = 0; it < config.iteration_budget; ++it) {
        counter_rng it_base = base.split2(1, static_cast<std::uint64_t>(it));
        counter_rng sel_rng = it_base.split(1);
        counter_rng roll_rng = it_base.split(2);
        counter_rng gate_rng = it_base.split(3);

        tree_node* node = root.get();
        std::vector<path_hop> path;
        double leaf_v = 0.0;
        for (;;) {
            if (!node->expanded) ctx.expand(*node);
            if (node->terminal) break;
            if (node != root.get() && node->visits == 0) {
                leaf_v = ctx.leaf_estimate(*node, roll_rng, gate_rng);
                break;
            }
            const int ei = ctx.pick_edge(*node, sel_rng);
            tree_edge& e = node->edges[static_cast<std::size_t>(ei)];
            const double r = env.reward(node->s, e.action);
            tree_node* child = ctx.child_after(*node, e, sel_rng);
            path.push_back({node, &e, r});
            node = child;
        }

        node->visits += 1;
        double ret = leaf_v;
        for (auto hop = path.rbegin(); hop != path.rend(); ++hop) {
            tree_edge& e = *hop->edge;
            tree_node& parent = *hop->parent;
            ret = hop->r + config.discount * ret;
            if (config.variant == search_variant::uct) {
                if (config.value_clipped && config.clip_backed_up)
                    ret = ctx.clip_into(ret, ctx.bounds_for(parent.s));
                const auto [nq, nv] = update_uct(e.q, e.visits, ret);
                e.q = nq;
                e.visits = nv;
            } else {
                e.visits += 1;
                e.mu += (hop->r - e.mu) / static_cast<double>(e.visits);
                std::vector<std::int64_t> cv(e.children.size());
                std::vector<double> cval(e.children.size());
                for (std::size_t i = 0; i < e.children.size(); ++i) {
                    cv[i] = e.children[i]->visits;
                    cval[i] = ctx.node_value(*e.children[i]);
                }
                e.q = soft_q_update(e.mu, config.discount, cv, cval, e.visits);
                if (config.value_clipped && config.clip_backed_up)
                    e.q = ctx.clip_into(e.q, ctx.bounds_for(parent.s));
            }
            parent.visits += 1;
        }

        double trace_v = 0.0;
        if (config.variant == search_variant::uct) {
            bool any = false;
            double best = -std::numeric_limits<double>::infinity();
            for (const auto& e : root->edges)
                if (e.visits > 0) {
                    any = true;
                    best = std::max(best, e.q);
                }
            trace_v = any ? best : 0.0;
        } else {
            trace_v = ctx.node_value(*root);
        }
        if (config.value_clipped) trace_v = ctx.clip_into(trace_v, res.root_bounds);
        res.root_value_trace.push_back(trace_v);
    }

    res.root_value = res.root_value_trace.back();
    res.action_visits.resize(root->edges.size());
    int best = -1;
    double best_q = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < root->edges.size(); ++i) {
        res.action_visits[i] = root->edges[i].visits;
        if (root->edges[i].visits > 0 && root->edges[i].q > best_q) {
            best_q = root->edges[i].q;
            best = static_cast<int>(i);
        }
    }
    res.best_action_index = best;
    if (best >= 0) res.best_action = root->edges[static_cast<std::size_t>(best)].action;
    return res;
}

}  // namespace rex
