//! Flow-sensitive constant and type propagation within one method.
//!
//! Values are tracked through `const*`, `move*`, static fields with constant
//! initializers, and integer arithmetic on constants. Nothing is folded
//! through method calls, so string concatenation yields a non-constant.

use std::collections::BTreeMap;

use crate::graph::cfg::{exception_successors, normal_successors};
use crate::smali::{ClassDef, FieldRef, Literal, MethodDef, Op, Reg, SmaliProgram};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum AbsVal {
    /// Not yet assigned on any path.
    #[default]
    Bottom,
    Int(i64),
    Str(String),
    Class(String),
    /// Object allocated by `new-instance` of exactly this class.
    Obj(String),
    /// Non-constant value with a known static type.
    Typed(String),
    Top,
}

impl AbsVal {
    pub fn join(&self, other: &AbsVal) -> AbsVal {
        match (self, other) {
            (AbsVal::Bottom, x) | (x, AbsVal::Bottom) => x.clone(),
            (a, b) if a == b => a.clone(),
            _ => AbsVal::Top,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, AbsVal::Int(_) | AbsVal::Str(_) | AbsVal::Class(_))
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            AbsVal::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            AbsVal::Str(s) => Some(s),
            _ => None,
        }
    }

    /// Static type if known.
    pub fn type_name(&self) -> Option<&str> {
        match self {
            AbsVal::Obj(t) | AbsVal::Typed(t) => Some(t),
            AbsVal::Str(_) => Some("Ljava/lang/String;"),
            AbsVal::Class(_) => Some("Ljava/lang/Class;"),
            _ => None,
        }
    }
}

impl From<&Literal> for AbsVal {
    fn from(l: &Literal) -> Self {
        match l {
            Literal::Int(v) => AbsVal::Int(*v),
            Literal::Str(s) => AbsVal::Str(s.clone()),
            Literal::Bool(b) => AbsVal::Int(i64::from(*b)),
            Literal::Null => AbsVal::Int(0),
            Literal::Raw(_) => AbsVal::Top,
        }
    }
}

/// Program-wide values of static fields: the join of the initializer and
/// every `sput` to the field.
#[derive(Debug, Clone, Default)]
pub struct FieldConsts {
    values: BTreeMap<String, AbsVal>,
}

impl FieldConsts {
    pub fn compute(program: &SmaliProgram) -> FieldConsts {
        let mut initial = FieldConsts::default();
        for class in program.classes.values() {
            for f in class.fields.iter().filter(|f| f.is_static()) {
                let key = format!("{}->{}:{}", class.name, f.name, f.ty);
                let v = f.initial.as_ref().map(AbsVal::from).unwrap_or(AbsVal::Bottom);
                initial.values.insert(key, v);
            }
        }
        let mut out = initial.clone();
        for (class, method) in program.methods() {
            if !method.instructions.iter().any(|i| matches!(i.op, Op::StaticPut { .. })) {
                continue;
            }
            let facts = ConstFacts::analyze(class, method, &initial);
            for (i, ins) in method.instructions.iter().enumerate() {
                if let Op::StaticPut { src, field } = &ins.op {
                    let v = facts.reg(i, *src).clone();
                    let v = if v == AbsVal::Bottom { AbsVal::Top } else { v };
                    let e = out.values.entry(field.to_string()).or_default();
                    *e = e.join(&v);
                }
            }
        }
        out
    }

    pub fn get(&self, field: &FieldRef) -> AbsVal {
        match self.values.get(&field.to_string()) {
            Some(AbsVal::Bottom) | None => AbsVal::Typed(field.ty.clone()),
            Some(v) => v.clone(),
        }
    }
}

/// Abstract register values before each instruction.
#[derive(Debug, Clone)]
pub struct ConstFacts {
    /// `before[i]` has `register_count + 1` slots; the last is the pending
    /// invoke result.
    before: Vec<Vec<AbsVal>>,
}

impl ConstFacts {
    pub fn analyze(class: &ClassDef, method: &MethodDef, fields: &FieldConsts) -> ConstFacts {
        let n = method.instructions.len();
        let width = method.register_count as usize + 1;
        let mut before = vec![vec![AbsVal::Bottom; width]; n];
        if n == 0 {
            return ConstFacts { before };
        }
        let slot_types = method.param_slot_types(&class.name);
        for (reg, ty) in method.param_registers().into_iter().zip(slot_types) {
            before[0][reg as usize] = AbsVal::Typed(ty);
        }

        let mut reached = vec![false; n];
        reached[0] = true;
        let mut work = vec![0usize];
        while let Some(i) = work.pop() {
            let out = transfer(&method.instructions[i].op, &before[i], fields);
            let mut targets: Vec<(usize, &Vec<AbsVal>)> =
                normal_successors(method, i).into_iter().map(|s| (s, &out)).collect();
            let pre = before[i].clone();
            for h in exception_successors(method, i) {
                targets.push((h, &pre));
            }
            for (s, state) in targets {
                let mut changed = !reached[s];
                reached[s] = true;
                for (slot, v) in before[s].iter_mut().zip(state.iter()) {
                    let j = slot.join(v);
                    if j != *slot {
                        *slot = j;
                        changed = true;
                    }
                }
                if changed && !work.contains(&s) {
                    work.push(s);
                }
            }
        }
        ConstFacts { before }
    }

    /// Value of `reg` just before instruction `i`.
    pub fn reg(&self, i: usize, reg: Reg) -> &AbsVal {
        self.before
            .get(i)
            .and_then(|s| s.get(reg as usize))
            .unwrap_or(&AbsVal::Bottom)
    }
}

fn transfer(op: &Op, input: &[AbsVal], fields: &FieldConsts) -> Vec<AbsVal> {
    let mut s = input.to_vec();
    let result = s.len() - 1;
    let set = |s: &mut Vec<AbsVal>, r: Reg, v: AbsVal| {
        if let Some(slot) = s.get_mut(r as usize) {
            *slot = v;
        }
    };
    let get = |s: &Vec<AbsVal>, r: Reg| s.get(r as usize).cloned().unwrap_or_default();
    match op {
        Op::Move { dst, src, wide } => {
            let v = get(&s, *src);
            set(&mut s, *dst, v);
            if *wide {
                let hi = get(&s, src + 1);
                set(&mut s, dst + 1, hi);
            }
        }
        Op::MoveResult { dst, wide } => {
            let v = s[result].clone();
            set(&mut s, *dst, v);
            if *wide {
                set(&mut s, dst + 1, AbsVal::Top);
            }
        }
        Op::MoveException { dst } => set(&mut s, *dst, AbsVal::Typed("Ljava/lang/Throwable;".into())),
        Op::Const { dst, value, wide } => {
            set(&mut s, *dst, AbsVal::Int(*value));
            if *wide {
                set(&mut s, dst + 1, AbsVal::Top);
            }
        }
        Op::ConstString { dst, value } => set(&mut s, *dst, AbsVal::Str(value.clone())),
        Op::ConstClass { dst, class } => set(&mut s, *dst, AbsVal::Class(class.clone())),
        Op::CheckCast { reg, ty } => {
            if !matches!(get(&s, *reg), AbsVal::Obj(_) | AbsVal::Str(_) | AbsVal::Class(_)) {
                set(&mut s, *reg, AbsVal::Typed(ty.clone()));
            }
        }
        Op::InstanceOf { dst, .. } | Op::ArrayLength { dst, .. } => set(&mut s, *dst, AbsVal::Typed("I".into())),
        Op::NewInstance { dst, class } => set(&mut s, *dst, AbsVal::Obj(class.clone())),
        Op::NewArray { dst, ty, .. } => set(&mut s, *dst, AbsVal::Typed(ty.clone())),
        Op::FilledNewArray { ty, .. } => s[result] = AbsVal::Typed(ty.clone()),
        Op::ArrayGet { dst, .. } => set(&mut s, *dst, AbsVal::Top),
        Op::InstanceGet { dst, field, .. } => set(&mut s, *dst, AbsVal::Typed(field.ty.clone())),
        Op::StaticGet { dst, field } => {
            let v = fields.get(field);
            set(&mut s, *dst, v);
        }
        Op::Invoke { method, .. } => {
            s[result] = if method.return_type == "V" {
                AbsVal::Bottom
            } else {
                AbsVal::Typed(method.return_type.clone())
            };
        }
        Op::Unary { op, dst, src } => {
            let v = match get(&s, *src) {
                AbsVal::Int(x) => fold_unary(op, x).map(AbsVal::Int).unwrap_or(AbsVal::Top),
                _ => AbsVal::Top,
            };
            set(&mut s, *dst, v);
        }
        Op::Binary { op, dst, a, b } => {
            let v = match (get(&s, *a), get(&s, *b)) {
                (AbsVal::Int(x), AbsVal::Int(y)) => fold_binary(op, x, y).map(AbsVal::Int).unwrap_or(AbsVal::Top),
                _ => AbsVal::Top,
            };
            set(&mut s, *dst, v);
        }
        Op::BinaryLit { op, dst, src, lit } => {
            let v = match get(&s, *src) {
                AbsVal::Int(x) if op == "rsub-int" => AbsVal::Int(lit.wrapping_sub(x)),
                AbsVal::Int(x) => fold_binary(op, x, *lit).map(AbsVal::Int).unwrap_or(AbsVal::Top),
                _ => AbsVal::Top,
            };
            set(&mut s, *dst, v);
        }
        _ => {}
    }
    s
}

fn fold_unary(op: &str, x: i64) -> Option<i64> {
    Some(match op {
        "neg-int" | "neg-long" => x.wrapping_neg(),
        "not-int" | "not-long" => !x,
        "int-to-long" | "long-to-int" => x,
        "int-to-byte" => x as i8 as i64,
        "int-to-short" => x as i16 as i64,
        "int-to-char" => x as u16 as i64,
        _ => return None,
    })
}

fn fold_binary(op: &str, x: i64, y: i64) -> Option<i64> {
    let base = op.split('-').next()?;
    if op.ends_with("float") || op.ends_with("double") {
        return None;
    }
    Some(match base {
        "add" => x.wrapping_add(y),
        "sub" => x.wrapping_sub(y),
        "mul" => x.wrapping_mul(y),
        "and" => x & y,
        "or" => x | y,
        "xor" => x ^ y,
        "shl" => x.wrapping_shl(y as u32),
        _ => return None,
    })
}
