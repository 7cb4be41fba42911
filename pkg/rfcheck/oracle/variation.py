from rfcheck.errors import DomainError
from rfcheck.forest.tree import Cell
from rfcheck.oracle.model import AdditiveModel


def cell_variation(model: AdditiveModel, cell: Cell) -> float:
    """
    Variation of the regression function within a cell,
    sup |m(x) - m(x')| over x, x' in the cell. For an additive model this is
    the sum over coordinates of the range of m_j on the cell's interval.
    """
    if cell.p != model.p:
        raise DomainError(f"cell has p={cell.p} but the model has p={model.p}")
    if not cell.volume > 0:
        raise DomainError("cell has zero volume")
    return sum(
        component.range(float(cell.lower[axis]), float(cell.upper[axis]))
        for axis, component in enumerate(model.components)
    )
