from abc import abstractmethod
from typing import Any, Optional

from theflow import Function, Node, Param, lazy


class BaseComponent(Function):
    """A component is a unit of numerical work that can be composed into a suite.

    Parameters are declared as typed class attributes and can be overridden at
    construction, e.g. `ContinuityCheck(taus=(0.1, 0.05))`. A component that runs
    for long may push intermediate results to an output queue set by its caller.
    """

    def set_output_queue(self, queue):
        self._queue = queue
        for name in self._ff_nodes:
            node = getattr(self, name)
            if isinstance(node, BaseComponent):
                node.set_output_queue(queue)

    def report_output(self, output: Optional[Any]):
        queue = getattr(self, "_queue", None)
        if queue is not None:
            queue.put_nowait(output)

    @abstractmethod
    def run(self, *args, **kwargs) -> Any:
        """Run the component."""
        ...


__all__ = ["BaseComponent", "Param", "Node", "lazy"]
