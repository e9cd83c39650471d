use super::{AgentParams, AgentState, Decision};
use crate::environment::Point;
use crate::planner::{AgentKind, Plan};

const EPS: f64 = 1e-12;

/// Applies a decision: updates speed, swaps in `replanned` for `Replan`
/// (a failed replan stops the agent) and advances along the plan polyline.
pub fn act(mut s: AgentState, decision: Decision, replanned: Option<Plan>, params: &AgentParams) -> AgentState {
    let max = s.profile.max_speed;
    let speed = match decision {
        Decision::Proceed => match s.kind {
            AgentKind::Walker => max,
            AgentKind::Driver => s.speed,
        },
        Decision::Stop | Decision::Yield => 0.0,
        Decision::Decelerate => s.speed - params.decel,
        Decision::Accelerate => s.speed + params.accel,
        Decision::Replan => match replanned {
            Some(plan) => {
                let at_start = s.position.distance(plan.steps[0].cell.center()) < EPS;
                s.cursor = if at_start { 1.min(plan.len()) } else { 0 };
                s.plan = plan;
                match s.kind {
                    AgentKind::Walker => max,
                    AgentKind::Driver => s.speed,
                }
            }
            None => 0.0,
        },
    };
    s.speed = speed.clamp(0.0, max);
    let v = s.speed;
    advance(&mut s, v);
    if s.speed == 0.0 {
        s.wait_steps += 1;
    } else {
        s.wait_steps = 0;
    }
    s
}

/// Moves `dist` cells along the polyline of plan cell centers, crossing vertices.
fn advance(s: &mut AgentState, mut dist: f64) {
    while dist > EPS && s.cursor < s.plan.len() {
        let step = s.plan.steps[s.cursor];
        let target = step.cell.center();
        let gap = s.position.distance(target);
        if gap <= dist + EPS {
            s.position = target;
            dist -= gap;
            s.cursor += 1;
            if step.heading.is_some() {
                s.heading = step.heading;
            }
        } else {
            let t = dist / gap;
            s.position = Point::new(
                s.position.x + (target.x - s.position.x) * t,
                s.position.y + (target.y - s.position.y) * t,
            );
            dist = 0.0;
        }
    }
    if s.kind == AgentKind::Driver {
        snap_to_lane(s);
    }
}

/// Pins the lateral coordinate of a driver to the lane center of the segment it travels.
fn snap_to_lane(s: &mut AgentState) {
    if s.cursor == 0 || s.cursor >= s.plan.len() {
        return;
    }
    let from = s.plan.steps[s.cursor - 1].cell.center();
    let to = s.plan.steps[s.cursor].cell.center();
    if from.x == to.x {
        s.position.x = from.x;
    } else if from.y == to.y {
        s.position.y = from.y;
    }
}

/// Distance from `p` to the polyline through the plan's cell centers.
pub fn distance_to_polyline(plan: &Plan, p: Point) -> f64 {
    let pts: Vec<Point> = plan.cells().map(|c| c.center()).collect();
    if pts.len() == 1 {
        return p.distance(pts[0]);
    }
    pts.windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let (dx, dy) = (b.x - a.x, b.y - a.y);
            let len2 = dx * dx + dy * dy;
            let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
            p.distance(Point::new(a.x + t * dx, a.y + t * dy))
        })
        .fold(f64::INFINITY, f64::min)
}
