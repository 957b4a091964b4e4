//! Task model, evaluator policy and their optimizers.

pub mod checkpoint;
pub mod logreg;
pub mod optim;
pub mod policy;

pub use checkpoint::{BaselineSnapshot, Checkpoint};
pub use logreg::{lr_evaluate, lr_forward, lr_loss, lr_loss_and_grad, sgd_step, ParamVector, PROB_CLAMP};
pub use optim::{AdamState, Direction, DEFAULT_EVALUATOR_LR};
pub use policy::{MlpPolicy, PolicyTrace, DEFAULT_HIDDEN};
