import logging

from django.dispatch import Signal, receiver

audit_logger = logging.getLogger('audit_logger')
error_logger = logging.getLogger('error_logger')

# Sent by the planner after every executed step and once per finished run.
step_recorded = Signal()
plan_finished = Signal()


@receiver(step_recorded)
def log_step(sender, step, **kwargs):
    audit_logger.info(
        f"step {step.t}: {step.branch} branch, {step.cloud_size} obstacle points, "
        f"{step.constraints} constraints, l_n={step.l_n:.4f}",
        extra={
            'step': step.t,
            'event': 'step',
            'details': {
                'branch': step.branch,
                'position': [float(v) for v in step.position],
                'l_n': step.l_n,
                'solve_time_eq1': step.timings.get('eq1'),
            },
        },
    )


@receiver(plan_finished)
def log_outcome(sender, trace, **kwargs):
    message = f"plan finished with {trace.outcome.value} after {len(trace.steps)} steps"
    extra = {
        'step': len(trace.steps),
        'event': 'outcome',
        'details': {'outcome': trace.outcome.value, 'final_distance': trace.final_distance},
    }
    if trace.succeeded:
        audit_logger.info(message, extra=extra)
    else:
        error_logger.error(message, extra=extra)
