//! Symbolic kitchen world: 21 table cells, the recipe's object catalog,
//! seeded random layouts, micro-action execution and the trial driver.

mod exec;
mod scene;
mod trial;

pub use exec::{annotate_targets, apply_action, is_supported, target_cell, SimError};
pub use scene::{
    catalog, cell_coord, cell_symbol, random_scene, random_scene_with, scene_to_state, standard_scene, table_cells,
    Location, ObjectKind, Orientation, RandomSceneConfig, Scene, SceneObject, SceneViolation, SizeClass, TableCell,
    CELL_COUNT, GRID_COLUMNS, LARGE_CELLS,
};
pub use trial::{
    checkable_goal, demonstrate, execute_plan, partial_selection, plan_macro, plan_macro_with, plan_recipe,
    plan_recipe_with, precondition_report, prepare, prepare_from, remove_units, run_trial, ExecutionReport, Failure,
    MacroResult, Outcome, RecipePlan, Segment, Solver, Stage, TrialConfig, TrialMode,
};

impl Scene {
    /// Scene facts; see [`scene_to_state`].
    pub fn to_state(&self) -> crate::predicate::State {
        scene_to_state(self)
    }
}

#[cfg(test)]
mod tests;
