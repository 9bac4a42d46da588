/**
 * Wire records shared with the gateway: render commands in (one JSON
 * object per message) and interaction signals out.  The client never
 * computes priority or policy; it only displays what the engine decided.
 */

export const INSERT_EVENT = 'insert_event';
export const INSERT_CLUSTER = 'insert_cluster';
export const UPDATE_CLUSTER = 'update_cluster_count';
export const EXPIRE_HIGHLIGHT = 'expire_highlight';

export interface EventPayload {
    event_id: string;
    ts: number;
    severity: number;
    source: string;
    actor: string;
    kind: string;
    reputation: number;
    msg: string;
    class: number;
    score?: number;
}

export interface ClusterPayload {
    node_id: number;
    key: string[];
    count: number;
    window_start: number;
    window_end: number;
    representative: EventPayload;
    class: number;
}

export interface UpdatePayload {
    node_id: number;
    count: number;
    class: number;
}

export interface ExpirePayload {
    ref_seq: number;
    event_id: string;
}

export interface CommandStyle {
    opacity: number;
    pulse: boolean;
    pulse_ms: number;
}

export interface RenderCommand {
    seq: number;
    cycle: number;
    kind: string;
    payload: EventPayload | ClusterPayload | UpdatePayload | ExpirePayload;
    style: CommandStyle;
}

export interface Selection {
    sources: string[];
    actors: string[];
    kinds: string[];
}

export interface WireSignal {
    scroll_velocity: number;
    selection_active: boolean;
    selection: Selection;
    client_ts: number;
}

export function parseCommand(raw: string): RenderCommand | null {
    let data: unknown;
    try {
        data = JSON.parse(raw);
    } catch {
        return null;
    }
    if (typeof data !== 'object' || data === null) return null;
    const cmd = data as Record<string, unknown>;
    if (typeof cmd.seq !== 'number' || typeof cmd.kind !== 'string') return null;
    if (typeof cmd.payload !== 'object' || cmd.payload === null) return null;
    const styleRaw = (cmd.style ?? {}) as Record<string, unknown>;
    return {
        seq: cmd.seq,
        cycle: typeof cmd.cycle === 'number' ? cmd.cycle : 0,
        kind: cmd.kind,
        payload: cmd.payload as RenderCommand['payload'],
        style: {
            opacity: typeof styleRaw.opacity === 'number' ? styleRaw.opacity : 1.0,
            pulse: Boolean(styleRaw.pulse),
            pulse_ms: typeof styleRaw.pulse_ms === 'number' ? styleRaw.pulse_ms : 3000,
        },
    };
}

export function serializeSignal(sig: WireSignal): string {
    return JSON.stringify({
        scroll_velocity: sig.scroll_velocity,
        selection_active: sig.selection_active,
        selection: sig.selection,
        client_ts: sig.client_ts,
    });
}

export function serializeResume(fromSeq: number): string {
    return JSON.stringify({ resume_from: fromSeq });
}

export const CLASS_NAMES = ['critical', 'warning', 'info'];

export function classNameOf(cls: number): string {
    return CLASS_NAMES[cls] ?? 'info';
}
