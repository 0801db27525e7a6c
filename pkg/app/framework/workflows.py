import asyncio
from typing import Any, Callable, List, Optional, Sequence

from app.core.logging import Logger
from app.framework.checks import Check, CheckResult
from app.framework.context import RunContext

logger = Logger(name="Workflow")


# --------------------------------------------------------------------------------
#       Workflow Start
# --------------------------------------------------------------------------------


class WorkflowRunner:
    def __init__(self, context: RunContext):
        """
        Initialize with the run context that collects results and the log.
        """
        self.context = context

    def run_sequence(self, checks: Sequence[Check], skip: Optional[List[str]] = None) -> List[CheckResult]:
        """
        Run checks sequentially, optionally skipping some.

        Args:
            checks (list): Ready check instances in execution order.
            skip (list): Optional list of check names to skip.
        """
        skip = skip or []
        results: List[CheckResult] = []

        for check in checks:
            if check.name in skip:
                continue

            try:
                outcome = check.run()
            except Exception as e:
                self.context.error(f"(WorkflowRunner) Check '{check.name}' raised: {e}")
                outcome = [CheckResult(name=check.name, instance="-", deviation=float("inf"), tolerance=0.0, passed=False, detail=str(e))]

            for result in outcome:
                self.context.add_result(result.model_dump())
                if not result.passed:
                    self.context.error(f"(WorkflowRunner) {result.name} failed on {result.instance}: deviation {result.deviation:.3e}")
            results.extend(outcome)

        return results

    def run_parallel(self, task: Callable[[Any], Any], cells: Sequence[Any], jobs: int = 1) -> List[Any]:
        """
        Evaluate `task` on every cell with at most `jobs` worker threads.
        Results keep the order of `cells`; exceptions are returned in place.
        """
        return asyncio.run(self._gather(task, cells, max(1, jobs)))

    async def _gather(self, task: Callable[[Any], Any], cells: Sequence[Any], jobs: int) -> List[Any]:
        semaphore = asyncio.Semaphore(jobs)

        async def guarded(cell):
            async with semaphore:
                try:
                    return await asyncio.to_thread(task, cell)
                except Exception as e:
                    logger.error(f"[!] Cell {cell} failed: {e}")
                    return e

        return await asyncio.gather(*(guarded(cell) for cell in cells))


# --------------------------------------------------------------------------------
#       Workflow End
# --------------------------------------------------------------------------------
